//! One-shot run: generate a mesh, build a harmonic basis, draw trajectories,
//! bucket them and check every comparable pair against the oracles.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{auto_mu, build_basis_with_report, canonicalize, BasisError, BasisOptions, HarmonicBasis};
use crate::classify::{bucketize, winding_vector, write_trajectories, BucketReport, BucketSummary, ClassifierConfig, Trajectory};
use crate::hodge::GossipConfig;
use crate::netgen::{classed_paths, museum_trajectories, waypoint_path, RoomWalk};
use crate::simharness::{
    classification_study, mu_grid, ClassificationReport, DomainSource, Generated, SafeInterval, SimError,
};
use crate::surface::io::write_mesh;

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: SimError,
}

impl PipelineError {
    /// Failures caused by the round cap rather than bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self.source, SimError::Basis(BasisError::NotConverged { .. }))
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

fn at<T, E: Into<SimError>>(stage: &'static str, r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| PipelineError { stage, source: e.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MuPolicy {
    /// Half the smallest hole-loop period of the basis.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectorySource {
    None,
    /// Left-to-right paths passing each hole above or below.
    Classed {
        patterns: Vec<Vec<bool>>,
        per_class: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Entrance-to-exit walks through the rooms of a museum domain.
    Museum {
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        mode: RoomWalk,
    },
    /// Shortest-path chains through random waypoints, all between one
    /// pair of endpoints (random unless given).
    Waypoints {
        n: usize,
        waypoints: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        source: Option<usize>,
        #[serde(default)]
        target: Option<usize>,
    },
    Inline { trajectories: Vec<Trajectory> },
}

fn default_eps() -> f64 {
    1e-6
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    #[serde(default)]
    pub name: String,
    pub domain: DomainSource,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub basis_seed: u64,
    #[serde(default)]
    pub basis: BasisOptions,
    #[serde(default = "default_true")]
    pub canonical: bool,
    pub trajectories: TrajectorySource,
    #[serde(default)]
    pub mu: MuPolicy,
    #[serde(default)]
    pub quantize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub n_pairs: usize,
    pub skipped_pairs: usize,
    /// Share of pairs where `sigma < mu` matches the tree-cotree verdict.
    pub agreement: f64,
    pub geometric_agreement: Option<f64>,
    pub safe_mu: Option<SafeInterval>,
    /// Pairs whose shared bucket disagrees with the tree-cotree verdict.
    pub bucket_mismatches: usize,
    pub bucket_geometric_mismatches: Option<usize>,
    /// Largest distance from an integer over closed pair differences.
    pub max_winding_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub name: String,
    pub surface_hash: String,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub betti1: usize,
    pub hole_count: Option<usize>,
    pub basis_size: usize,
    pub basis_candidates: usize,
    pub local_disagreements: usize,
    pub canonical: bool,
    pub eps: f64,
    pub mu: f64,
    pub n_trajectories: usize,
    pub buckets: BucketSummary,
    pub near_threshold: usize,
    pub oracle: OracleSummary,
    /// Stage name to file name.
    pub artifacts: BTreeMap<String, String>,
}

pub struct PipelineOutput {
    pub summary: PipelineSummary,
    /// File name and contents, `summary.json` last.
    pub files: Vec<(String, String)>,
}

fn trajectories(src: &TrajectorySource, g: &Generated) -> std::result::Result<Vec<Trajectory>, SimError> {
    let s = g.surface();
    Ok(match src {
        TrajectorySource::None => Vec::new(),
        TrajectorySource::Classed { patterns, per_class, seed } => {
            let Generated::Grid(d) = g else {
                return Err(SimError::InvalidSpec("classed trajectories need a grid domain".into()));
            };
            classed_paths(d, patterns, *per_class, *seed)?.into_iter().map(|p| p.trajectory).collect()
        }
        TrajectorySource::Museum { n, seed, mode } => {
            let Generated::Museum(m) = g else {
                return Err(SimError::InvalidSpec("museum trajectories need a museum domain".into()));
            };
            museum_trajectories(m, *n, *seed, *mode)?
        }
        TrajectorySource::Waypoints { n, waypoints, seed, source, target } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let nv = s.n_nodes();
            let a = source.unwrap_or_else(|| rng.gen_range(0..nv));
            let mut b = target.unwrap_or_else(|| rng.gen_range(0..nv));
            while target.is_none() && b == a && nv > 1 {
                b = rng.gen_range(0..nv);
            }
            if a >= nv || b >= nv {
                return Err(SimError::InvalidSpec(format!("endpoint out of range for {nv} nodes")));
            }
            (0..*n)
                .map(|i| Ok(Trajectory::new(format!("w{i:04}"), waypoint_path(s, a, b, *waypoints, &mut rng)?)))
                .collect::<std::result::Result<_, SimError>>()?
        }
        TrajectorySource::Inline { trajectories } => trajectories.clone(),
    })
}

fn resolve_mu(policy: MuPolicy, b: &HarmonicBasis) -> std::result::Result<f64, SimError> {
    match policy {
        MuPolicy::Fixed(mu) => Ok(mu),
        MuPolicy::Auto => auto_mu(b).ok_or_else(|| {
            SimError::InvalidSpec("automatic mu needs hole-loop periods; give a fixed mu".into())
        }),
    }
}

pub fn run_pipeline(spec: &PipelineSpec) -> Result<PipelineOutput> {
    let g = at("generate", spec.domain.build())?;
    let s = g.surface();
    let mut files = vec![("mesh.txt".to_string(), write_mesh(s))];

    let cfg = GossipConfig { seed: spec.basis_seed, ..GossipConfig::with_eps(spec.eps) };
    let (mut b, report) = at("basis", build_basis_with_report(s, &cfg, &spec.basis))?;
    if spec.canonical {
        b = at("basis", canonicalize(&b, s))?;
    }
    files.push(("basis.json".into(), at("basis", b.to_json(s))?));

    let trajs = at("trajectories", trajectories(&spec.trajectories, &g))?;
    for t in &trajs {
        at("trajectories", t.validate(s))?;
    }
    files.push(("trajectories.jsonl".into(), write_trajectories(&trajs)));

    let mu = at("classify", resolve_mu(spec.mu, &b))?;
    let ccfg = ClassifierConfig { mu, quantize: spec.quantize };
    let buckets = at("classify", bucketize(&trajs, &b, s, &ccfg))?;
    files.push(("buckets.csv".into(), buckets.to_csv()));
    files.push(("buckets.json".into(), pretty(&buckets)));

    let anchors = g.truth().map(|t| t.anchors.as_slice());
    let study = at("oracle", classification_study(&spec.name, s, &b, &trajs, anchors, &mu_grid([1e-8, 10.0], 10), None))?;
    let oracle = at("oracle", oracle_summary(&study, &buckets, &trajs, &b, s, mu))?;
    files.push(("pairs.csv".into(), study.pairs_csv()));
    files.push(("mu_curve.csv".into(), study.plot_csv()));

    let mut artifacts: BTreeMap<String, String> = BTreeMap::new();
    for (stage, (file, _)) in ["mesh", "basis", "trajectories", "buckets", "bucket_report", "pairs", "mu_curve"].iter().zip(&files) {
        artifacts.insert(stage.to_string(), file.clone());
    }
    let summary = PipelineSummary {
        name: spec.name.clone(),
        surface_hash: s.hash(),
        n_nodes: s.n_nodes(),
        n_edges: s.n_edges(),
        n_faces: s.n_faces(),
        betti1: s.betti1(),
        hole_count: g.truth().map(|t| t.hole_count),
        basis_size: b.len(),
        basis_candidates: report.candidates,
        local_disagreements: report.local_disagreements,
        canonical: b.canonical,
        eps: spec.eps,
        mu,
        n_trajectories: trajs.len(),
        buckets: buckets.summary,
        near_threshold: buckets.near_threshold.len(),
        oracle,
        artifacts,
    };
    files.push(("summary.json".into(), pretty(&summary)));
    Ok(PipelineOutput { summary, files })
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn oracle_summary(
    study: &ClassificationReport,
    buckets: &BucketReport,
    trajs: &[Trajectory],
    b: &HarmonicBasis,
    s: &crate::surface::CombinatorialSurface,
    mu: f64,
) -> std::result::Result<OracleSummary, SimError> {
    let bucket_of = buckets.assignment();
    let by_id: BTreeMap<&str, &Trajectory> = trajs.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut mismatches = 0;
    let mut geo_mismatches = 0;
    let mut max_residual: Option<f64> = None;
    for p in &study.pairs {
        let together = bucket_of.get(&p.a) == bucket_of.get(&p.b);
        mismatches += usize::from(together != p.oracle_same);
        geo_mismatches += usize::from(p.geometric_same.is_some_and(|g| g != together));
        if b.canonical {
            let mut cycle = by_id[p.a.as_str()].nodes.clone();
            cycle.extend(by_id[p.b.as_str()].nodes.iter().rev().skip(1));
            let w = winding_vector(&Trajectory::new("pair", cycle), b, s)?;
            max_residual = Some(max_residual.map_or(w.residual, |m: f64| m.max(w.residual)));
        }
    }
    let has_geo = study.pairs.iter().any(|p| p.geometric_same.is_some());
    Ok(OracleSummary {
        n_pairs: study.pairs.len(),
        skipped_pairs: study.skipped_pairs,
        agreement: study.agreement(mu),
        geometric_agreement: study.geometric_agreement,
        safe_mu: study.safe_mu,
        bucket_mismatches: mismatches,
        bucket_geometric_mismatches: has_geo.then_some(geo_mismatches),
        max_winding_residual: max_residual,
    })
}
