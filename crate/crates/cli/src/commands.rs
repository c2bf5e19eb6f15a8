use std::path::{Path, PathBuf};

use hodgetrack::basis::{auto_mu, build_basis_with_report, canonicalize, BasisOptions, HarmonicBasis};
use hodgetrack::classify::{bucketize, read_trajectories, write_trajectories, ClassifierConfig, Trajectory};
use hodgetrack::hodge::{random_one_form, GossipConfig, HodgeSolver, StopRule};
use hodgetrack::netgen::{grid_domain, museum_domain, museum_trajectories, waypoint_path, DomainSpec, MuseumSpec, RoomWalk};
use hodgetrack::oracle::{harmonic_dim, OracleError, TreeCotree};
use hodgetrack::pipeline::{run_pipeline, MuPolicy, PipelineSpec};
use hodgetrack::simharness::{
    classification_study, mu_grid, run_accuracy_sweep, run_classification_study, run_convergence_sweep,
    run_randomness_study, ClassificationSpec, ExperimentSpec, SweepResult,
};
use hodgetrack::surface::io::{read_cochain1, read_mesh, write_cochain1, write_mesh};
use hodgetrack::surface::CombinatorialSurface;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cli::*;
use crate::config::GlobalConfig;
use crate::error::{CliError, Result};
use crate::output::{read_json, read_text, write_atomic};

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

/// One-line JSON result on stdout.
fn report<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("plain data"));
}

fn load_mesh(path: &Path) -> Result<CombinatorialSurface> {
    read_mesh(&read_text(path)?).map_err(|e| CliError::from(e).at(path))
}

fn load_basis(path: &Path, s: &CombinatorialSurface) -> Result<HarmonicBasis> {
    HarmonicBasis::from_json(s, &read_text(path)?).map_err(|e| CliError::from(e).at(path))
}

fn load_trajs(path: &Path, s: &CombinatorialSurface) -> Result<Vec<Trajectory>> {
    read_trajectories(&read_text(path)?, s).map_err(|e| CliError::from(e).at(path))
}

fn gossip(cfg: &GlobalConfig) -> GossipConfig {
    GossipConfig { seed: cfg.seed, ..GossipConfig::with_eps(cfg.eps) }
}

fn resolve_mu(cfg: &GlobalConfig, b: &HarmonicBasis) -> Result<f64> {
    match cfg.mu {
        MuPolicy::Fixed(m) => Ok(m),
        MuPolicy::Auto => auto_mu(b).ok_or_else(|| CliError::usage("automatic mu needs hole-loop periods in the basis; pass --mu")),
    }
}

pub fn gen(cmd: &GenCommand, cfg: &GlobalConfig) -> Result<()> {
    match cmd {
        GenCommand::Grid(a) => {
            let spec = match &a.spec {
                Some(p) => read_json::<DomainSpec>(p)?,
                None => match a.layout {
                    Layout::Scattered => DomainSpec::scattered(a.holes, a.nodes, cfg.seed),
                    Layout::Row => DomainSpec::holes_in_row(a.holes, a.nodes, cfg.seed),
                },
            };
            let d = grid_domain(&spec)?;
            write_atomic(&cfg.output(&a.out), &write_mesh(&d.surface))?;
            if let Some(t) = &a.truth {
                write_atomic(&cfg.output(t), &pretty(&d.truth))?;
            }
            report(&serde_json::json!({
                "nodes": d.surface.n_nodes(), "edges": d.surface.n_edges(), "faces": d.surface.n_faces(),
                "holes": d.truth.hole_count, "hash": d.surface.hash(),
            }));
        }
        GenCommand::Museum(a) => {
            let mut spec = museum_spec(a.spec.as_deref())?;
            if let Some(n) = a.nodes {
                spec.target_nodes = n;
            }
            if let Some(l) = a.levels {
                spec.levels = l;
            }
            let m = museum_domain(&spec)?;
            write_atomic(&cfg.output(&a.out), &write_mesh(&m.surface))?;
            if let Some(t) = &a.truth {
                write_atomic(&cfg.output(t), &pretty(&m.truth))?;
            }
            report(&serde_json::json!({
                "nodes": m.surface.n_nodes(), "rooms": m.rooms.n_rooms(), "holes": m.truth.hole_count,
                "entrance": m.entrance, "exit": m.exit, "hash": m.surface.hash(),
            }));
        }
        GenCommand::Trajs(a) => {
            let s = load_mesh(&a.mesh)?;
            let trajs = match a.kind {
                TrajKind::Waypoints => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    let nv = s.n_nodes();
                    let (src, dst) = (a.source.unwrap_or(0), a.target.unwrap_or(nv - 1));
                    if src >= nv || dst >= nv {
                        return Err(CliError::usage(format!("endpoints must be below {nv}")));
                    }
                    (0..a.n)
                        .map(|i| Ok(Trajectory::new(format!("w{i:04}"), waypoint_path(&s, src, dst, a.waypoints, &mut rng)?)))
                        .collect::<Result<Vec<_>>>()?
                }
                TrajKind::Museum => {
                    let m = museum_domain(&museum_spec(a.museum.as_deref())?)?;
                    if m.surface.hash() != s.hash() {
                        return Err(CliError::data("museum spec does not reproduce this mesh").at(&a.mesh));
                    }
                    let mode = match a.mode {
                        WalkMode::Simple => RoomWalk::Simple,
                        WalkMode::NoBacktrack => RoomWalk::NoBacktrack,
                    };
                    museum_trajectories(&m, a.n, cfg.seed, mode)?
                }
            };
            write_atomic(&cfg.output(&a.out), &write_trajectories(&trajs))?;
            report(&serde_json::json!({ "trajectories": trajs.len() }));
        }
    }
    Ok(())
}

fn museum_spec(path: Option<&Path>) -> Result<MuseumSpec> {
    path.map_or_else(|| Ok(MuseumSpec::default()), read_json)
}

#[derive(Serialize)]
struct DecomposeReport {
    converged: bool,
    iters_f: usize,
    iters_g: usize,
    err_dh: f64,
    err_dh_rms: f64,
    err_delta_h: f64,
    err_delta_h_rms: f64,
    messages_f: u64,
    messages_g: u64,
}

pub fn decompose(a: &DecomposeArgs, cfg: &GlobalConfig) -> Result<()> {
    let s = load_mesh(&a.mesh)?;
    let w = match &a.form {
        Some(p) => read_cochain1(&s, &read_text(p)?).map_err(|e| CliError::from(e).at(p))?,
        None => random_one_form(&s, cfg.seed),
    };
    let stop_rule = match a.stop_rule {
        StopRuleArg::Global => StopRule::Global,
        StopRuleArg::PerNode => StopRule::PerNode,
    };
    let g = GossipConfig { max_rounds: a.max_rounds, damping: a.damping, stop_rule, ..gossip(cfg) };
    let r = HodgeSolver::new(&s)?.decompose(&w, &g)?;
    let dir = cfg.output(&a.out);
    for (name, c) in [("h.txt", &r.h), ("df.txt", &r.df), ("dg.txt", &r.dg)] {
        write_atomic(&dir.join(name), &write_cochain1(&s, c)?)?;
    }
    let rep = DecomposeReport {
        converged: r.converged(),
        iters_f: r.iters_f,
        iters_g: r.iters_g,
        err_dh: r.residuals.dh_max,
        err_dh_rms: r.residuals.dh_rms,
        err_delta_h: r.residuals.delta_h_max,
        err_delta_h_rms: r.residuals.delta_h_rms,
        messages_f: r.messages_f,
        messages_g: r.messages_g,
    };
    write_atomic(&dir.join("report.json"), &pretty(&rep))?;
    report(&rep);
    if !rep.converged {
        return Err(CliError::not_converged(format!(
            "stopped after {} / {} rounds without reaching eps {}",
            r.iters_f, r.iters_g, cfg.eps
        )));
    }
    Ok(())
}

pub fn basis(cmd: &BasisCommand, cfg: &GlobalConfig) -> Result<()> {
    let BasisCommand::Build(a) = cmd;
    let s = load_mesh(&a.mesh)?;
    let opts = BasisOptions { confirmations: a.confirmations, global_check: !a.local_only, ..BasisOptions::default() };
    let (mut b, rep) = build_basis_with_report(&s, &gossip(cfg), &opts)?;
    if !a.raw {
        b = canonicalize(&b, &s)?;
    }
    write_atomic(&cfg.output(&a.out), &b.to_json(&s)?)?;
    report(&serde_json::json!({
        "forms": b.len(), "canonical": b.canonical, "candidates": rep.candidates,
        "local_disagreements": rep.local_disagreements, "auto_mu": auto_mu(&b),
    }));
    Ok(())
}

pub fn classify(a: &ClassifyArgs, cfg: &GlobalConfig) -> Result<()> {
    let s = load_mesh(&a.mesh)?;
    let b = load_basis(&a.basis, &s)?;
    let trajs = load_trajs(&a.trajs, &s)?;
    let mu = resolve_mu(cfg, &b)?;
    let rep = bucketize(&trajs, &b, &s, &ClassifierConfig { mu, quantize: a.quantize })?;
    let dir = cfg.output(&a.out);
    write_atomic(&dir.join("buckets.csv"), &rep.to_csv())?;
    write_atomic(&dir.join("buckets.json"), &pretty(&rep))?;
    report(&serde_json::json!({ "mu": mu, "summary": rep.summary, "near_threshold": rep.near_threshold.len() }));
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    betti1: usize,
    tree_cotree_rank: usize,
    /// `None` when the mesh is too large for the dense check.
    harmonic_dim: Option<usize>,
    basis_size: Option<usize>,
    mu: Option<f64>,
    n_pairs: usize,
    agreement: Option<f64>,
    geometric_agreement: Option<f64>,
    problems: Vec<String>,
}

pub fn oracle(cmd: &OracleCommand, cfg: &GlobalConfig) -> Result<()> {
    let OracleCommand::Check(a) = cmd;
    let s = load_mesh(&a.mesh)?;
    let tc = TreeCotree::new(&s);
    let dim = match harmonic_dim(&s) {
        Ok(d) => Some(d),
        Err(OracleError::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut problems = Vec::new();
    if tc.rank() != s.betti1() {
        problems.push(format!("tree-cotree rank {} but first Betti number {}", tc.rank(), s.betti1()));
    }
    if dim.is_some_and(|d| d != s.betti1()) {
        problems.push(format!("harmonic dimension {dim:?} but first Betti number {}", s.betti1()));
    }
    let b = a.basis.as_deref().map(|p| load_basis(p, &s)).transpose()?;
    if let Some(b) = &b {
        if b.len() != s.betti1() {
            problems.push(format!("basis has {} forms for first Betti number {}", b.len(), s.betti1()));
        }
    }
    let mut rep = OracleReport {
        betti1: s.betti1(),
        tree_cotree_rank: tc.rank(),
        harmonic_dim: dim,
        basis_size: b.as_ref().map(HarmonicBasis::len),
        mu: None,
        n_pairs: 0,
        agreement: None,
        geometric_agreement: None,
        problems,
    };
    if let (Some(b), Some(tp)) = (&b, &a.trajs) {
        let trajs = load_trajs(tp, &s)?;
        let mu = resolve_mu(cfg, b)?;
        let study = classification_study("check", &s, b, &trajs, None, &mu_grid([1e-8, 10.0], 10), None)?;
        let agreement = study.agreement(mu);
        if agreement < 1.0 {
            rep.problems.push(format!("classifier agrees with tree-cotree classes on {:.2}% of pairs", 100.0 * agreement));
        }
        rep.mu = Some(mu);
        rep.n_pairs = study.pairs.len();
        rep.agreement = Some(agreement);
    }
    write_atomic(&cfg.output(&a.out), &pretty(&rep))?;
    report(&rep);
    if !rep.problems.is_empty() {
        return Err(CliError::new(crate::error::EXIT_DATA, "oracle_mismatch", rep.problems.join("; ")));
    }
    Ok(())
}

pub fn sim(a: &SimArgs, cfg: &GlobalConfig) -> Result<()> {
    if a.experiment == Experiment::Fig8 {
        let mut spec = match &a.spec {
            Some(p) => read_json::<ClassificationSpec>(p)?,
            None => ClassificationSpec::fig8(),
        };
        if spec.name.is_empty() {
            spec.name = "fig8".into();
        }
        let r = run_classification_study(&spec)?;
        let dir = cfg.output(&a.out.clone().unwrap_or_else(|| PathBuf::from(&spec.name)));
        write_atomic(&dir.join(format!("{}.json", spec.name)), &pretty(&r))?;
        write_atomic(&dir.join(format!("{}_pairs.csv", spec.name)), &r.pairs_csv())?;
        write_atomic(&dir.join(format!("{}_plot.csv", spec.name)), &r.plot_csv())?;
        report(&serde_json::json!({
            "pairs": r.pairs.len(), "safe_mu": r.safe_mu,
            "reference_inside": r.reference_inside, "reference_overlap": r.reference_overlap,
        }));
        return Ok(());
    }
    let mut spec = match &a.spec {
        Some(p) => read_json::<ExperimentSpec>(p)?,
        None => match a.experiment {
            Experiment::Table1 => ExperimentSpec::table1(),
            Experiment::Fig6 => ExperimentSpec::fig6(),
            _ => ExperimentSpec::fig7(),
        },
    };
    if let Some(n) = a.seeds {
        spec.seeds = n;
        spec.seed_list.clear();
    }
    if spec.name.is_empty() {
        spec.name = format!("{:?}", a.experiment).to_lowercase();
    }
    let r: SweepResult = match a.experiment {
        Experiment::Table1 => run_randomness_study(&spec, cfg.threads)?,
        Experiment::Fig6 => run_convergence_sweep(&spec, cfg.threads)?,
        _ => run_accuracy_sweep(&spec, cfg.threads)?,
    };
    let out = a.out.clone().or_else(|| spec.out.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(&spec.name));
    let dir = cfg.output(&out);
    write_atomic(&dir.join(format!("{}.csv", spec.name)), &r.rows_csv())?;
    write_atomic(&dir.join(format!("{}.jsonl", spec.name)), &r.logs_jsonl())?;
    write_atomic(&dir.join(format!("{}_plot.csv", spec.name)), &r.plot_csv())?;
    let excluded = r.logs.iter().filter(|l| !l.converged).count();
    report(&serde_json::json!({ "rows": r.rows.len(), "runs": r.logs.len(), "excluded": excluded }));
    Ok(())
}

pub fn pipeline(a: &PipelineArgs, cfg: &GlobalConfig) -> Result<()> {
    let spec: PipelineSpec = read_json(&a.spec)?;
    let out = run_pipeline(&spec)?;
    let dir = cfg.output(&a.out);
    for (name, text) in &out.files {
        write_atomic(&dir.join(name), text)?;
    }
    let o = &out.summary.oracle;
    report(&serde_json::json!({
        "basis_size": out.summary.basis_size, "n_buckets": out.summary.buckets.n_buckets,
        "agreement": o.agreement, "safe_mu": o.safe_mu, "summary": dir.join("summary.json"),
    }));
    Ok(())
}
