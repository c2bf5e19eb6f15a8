//! Experiment sweeps: many random initial forms per cell, per-seed raw logs
//! and summary statistics per metric.

mod classification;
mod domains;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::BasisError;
use crate::classify::ClassifyError;
use crate::hodge::{random_one_form, GossipConfig, HodgeError, HodgeSolver, StopRule};
use crate::netgen::NetgenError;
use crate::oracle::OracleError;

pub use classification::{
    classification_study, mu_grid, run_classification_study, ClassificationReport, ClassificationSpec, CurvePoint,
    PairResult, SafeInterval,
};
pub use domains::{DomainSource, Generated};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Netgen(#[from] NetgenError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ItersF,
    ItersG,
    ErrDh,
    ErrDhRms,
    ErrDeltaH,
    ErrDeltaHRms,
    MessagesF,
    MessagesG,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::ItersF,
        Metric::ItersG,
        Metric::ErrDh,
        Metric::ErrDhRms,
        Metric::ErrDeltaH,
        Metric::ErrDeltaHRms,
        Metric::MessagesF,
        Metric::MessagesG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::ItersF => "iters_f",
            Metric::ItersG => "iters_g",
            Metric::ErrDh => "err_dh",
            Metric::ErrDhRms => "err_dh_rms",
            Metric::ErrDeltaH => "err_delta_h",
            Metric::ErrDeltaHRms => "err_delta_h_rms",
            Metric::MessagesF => "messages_f",
            Metric::MessagesG => "messages_g",
        }
    }

    pub fn of(self, log: &RunLog) -> f64 {
        match self {
            Metric::ItersF => log.iters_f as f64,
            Metric::ItersG => log.iters_g as f64,
            Metric::ErrDh => log.err_dh,
            Metric::ErrDhRms => log.err_dh_rms,
            Metric::ErrDeltaH => log.err_delta_h,
            Metric::ErrDeltaHRms => log.err_delta_h_rms,
            Metric::MessagesF => log.messages_f as f64,
            Metric::MessagesG => log.messages_g as f64,
        }
    }
}

fn default_seeds() -> usize {
    20
}

fn default_max_rounds() -> usize {
    1_000_000
}

/// A grid of cells (`domains x eps`), each run once per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub domains: Vec<DomainSource>,
    pub eps: Vec<f64>,
    /// Seeds per cell: `seed_base .. seed_base + seeds`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Explicit seed list; overrides `seeds` and `seed_base` when nonempty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seed_list: Vec<u64>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub stop_rule: StopRule,
    /// Empty means every metric.
    #[serde(default)]
    pub metrics: Vec<Metric>,
    /// Output directory used when the caller gives none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentSpec {
    pub fn new(name: &str, domains: Vec<DomainSource>, eps: Vec<f64>) -> Self {
        ExperimentSpec {
            name: name.into(),
            domains,
            eps,
            seeds: default_seeds(),
            seed_base: 0,
            seed_list: Vec::new(),
            max_rounds: default_max_rounds(),
            stop_rule: StopRule::Global,
            metrics: Vec::new(),
            out: None,
        }
    }

    /// Desk-scale randomness study: 6 holes, ~3000 nodes, eps 5e-3.
    pub fn table1() -> Self {
        Self::new("table1", vec![DomainSource::HolesInRow { holes: 6, nodes: 3000, seed: 1 }], vec![5e-3])
    }

    /// Iterations over eps, node count and hole count.
    pub fn fig6() -> Self {
        let mut domains = vec![DomainSource::HolesInRow { holes: 3, nodes: 1000, seed: 1 }];
        for nodes in [500, 2000] {
            domains.push(DomainSource::HolesInRow { holes: 3, nodes, seed: 1 });
        }
        for holes in [1, 6] {
            domains.push(DomainSource::HolesInRow { holes, nodes: 1000, seed: 1 });
        }
        Self { seeds: 10, metrics: vec![Metric::ItersF, Metric::ItersG, Metric::MessagesF, Metric::MessagesG], ..Self::new("fig6", domains, vec![5e-2, 5e-3, 5e-4]) }
    }

    /// Residuals over the same grid.
    pub fn fig7() -> Self {
        Self {
            name: "fig7".into(),
            metrics: vec![Metric::ErrDh, Metric::ErrDhRms, Metric::ErrDeltaH, Metric::ErrDeltaHRms],
            ..Self::fig6()
        }
    }

    pub fn seed_values(&self) -> Vec<u64> {
        if self.seed_list.is_empty() {
            (0..self.seeds as u64).map(|i| self.seed_base + i).collect()
        } else {
            self.seed_list.clone()
        }
    }

    pub fn metric_list(&self) -> Vec<Metric> {
        if self.metrics.is_empty() {
            Metric::ALL.to_vec()
        } else {
            let mut m = self.metrics.clone();
            m.sort();
            m.dedup();
            m
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.into()));
        if self.domains.is_empty() || self.eps.is_empty() {
            return bad("need at least one domain and one eps value");
        }
        if self.seed_values().len() < 2 {
            return bad("need at least two seeds per cell");
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("eps values must be positive");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        Ok(())
    }
}

/// One decomposition run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub domain: usize,
    pub n_h: usize,
    pub n_v: usize,
    pub eps: f64,
    pub seed: u64,
    pub converged: bool,
    pub iters_f: usize,
    pub iters_g: usize,
    pub err_dh: f64,
    pub err_dh_rms: f64,
    pub err_delta_h: f64,
    pub err_delta_h_rms: f64,
    pub messages_f: u64,
    pub messages_g: u64,
    /// Two messages per edge of the surface the solve runs on.
    pub messages_per_round: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub n_h: usize,
    pub n_v: usize,
    pub eps: f64,
    pub metric: String,
    /// Converged runs the statistics cover.
    pub n: usize,
    /// Runs left out for not converging.
    pub excluded: usize,
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub std_pct: f64,
}

impl StatRow {
    /// Summary of `values`; `None` when empty.
    pub fn from_values(n_h: usize, n_v: usize, eps: f64, metric: &str, excluded: usize, values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // clamping keeps constant samples exact
        let avg = (values.iter().sum::<f64>() / n as f64).clamp(min, max);
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - avg) * (v - avg)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let std_pct = if std == 0.0 { 0.0 } else { 100.0 * std / avg };
        Some(StatRow { n_h, n_v, eps, metric: metric.into(), n, excluded, min, max, avg, std, std_pct })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub rows: Vec<StatRow>,
    /// Every run, converged or not, in cell then seed order.
    pub logs: Vec<RunLog>,
}

impl SweepResult {
    pub fn rows_csv(&self) -> String {
        to_csv(&self.rows)
    }

    pub fn logs_jsonl(&self) -> String {
        to_jsonl(&self.logs)
    }

    /// `x = eps`, `y = avg`, one series per metric and domain.
    pub fn plot_csv(&self) -> String {
        let pts: Vec<PlotPoint> = self
            .rows
            .iter()
            .map(|r| PlotPoint { x: r.eps, y: r.avg, series: format!("{} nh={} nv={}", r.metric, r.n_h, r.n_v) })
            .collect();
        to_csv(&pts)
    }

    /// Rows for one metric, in cell order.
    pub fn metric_rows(&self, metric: Metric) -> Vec<&StatRow> {
        self.rows.iter().filter(|r| r.metric == metric.name()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("plain data"));
        out.push('\n');
    }
    out
}

/// Worker count: `0` means the machine's parallelism.
pub fn thread_count(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Maps `f` over `items` on `threads` workers, keeping input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = thread_count(threads).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    out.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every item mapped")).collect()
}

/// Runs every `(domain, eps, seed)` combination and summarizes per cell.
pub fn run_sweep(spec: &ExperimentSpec, threads: usize) -> Result<SweepResult> {
    spec.validate()?;
    let built = parallel_map(&spec.domains, threads, DomainSource::build).into_iter().collect::<Result<Vec<_>>>()?;
    let solvers = built.iter().map(|g| HodgeSolver::new(g.surface())).collect::<std::result::Result<Vec<_>, _>>()?;
    let seeds = spec.seed_values();
    let mut jobs = Vec::new();
    for d in 0..built.len() {
        for &eps in &spec.eps {
            for &seed in &seeds {
                jobs.push((d, eps, seed));
            }
        }
    }
    let logs = parallel_map(&jobs, threads, |&(d, eps, seed)| -> Result<RunLog> {
        let s = built[d].surface();
        let cfg = GossipConfig { eps, max_rounds: spec.max_rounds, seed, damping: 1.0, stop_rule: spec.stop_rule };
        let r = solvers[d].decompose(&random_one_form(s, seed), &cfg)?;
        Ok(RunLog {
            domain: d,
            n_h: s.betti1(),
            n_v: s.n_nodes(),
            eps,
            seed,
            converged: r.converged(),
            iters_f: r.iters_f,
            iters_g: r.iters_g,
            err_dh: r.residuals.dh_max,
            err_dh_rms: r.residuals.dh_rms,
            err_delta_h: r.residuals.delta_h_max,
            err_delta_h_rms: r.residuals.delta_h_rms,
            messages_f: r.messages_f,
            messages_g: r.messages_g,
            messages_per_round: 2 * solvers[d].working_surface().n_edges() as u64,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rows = summarize(&logs, &spec.metric_list());
    Ok(SweepResult { name: spec.name.clone(), rows, logs })
}

/// StatRows from raw logs: one per cell and metric, cells in first-seen
/// order, non-converged runs excluded.
pub fn summarize(logs: &[RunLog], metrics: &[Metric]) -> Vec<StatRow> {
    let mut cells: Vec<(usize, f64)> = Vec::new();
    for l in logs {
        if !cells.iter().any(|&(d, e)| d == l.domain && e == l.eps) {
            cells.push((l.domain, l.eps));
        }
    }
    let mut rows = Vec::new();
    for (d, eps) in cells {
        let runs: Vec<&RunLog> = logs.iter().filter(|l| l.domain == d && l.eps == eps).collect();
        let good: Vec<&RunLog> = runs.iter().copied().filter(|l| l.converged).collect();
        let excluded = runs.len() - good.len();
        if excluded > 0 {
            log::warn!("domain {d}, eps {eps}: {excluded} runs did not converge and are left out");
        }
        for &m in metrics {
            let values: Vec<f64> = good.iter().map(|l| m.of(l)).collect();
            if let Some(r) = StatRow::from_values(runs[0].n_h, runs[0].n_v, eps, m.name(), excluded, &values) {
                rows.push(r);
            }
        }
    }
    rows
}

/// Spread of the initial form matters: every metric, one cell.
pub fn run_randomness_study(spec: &ExperimentSpec, threads: usize) -> Result<SweepResult> {
    run_sweep(spec, threads)
}

pub fn run_convergence_sweep(spec: &ExperimentSpec, threads: usize) -> Result<SweepResult> {
    with_default_metrics(spec, &[Metric::ItersF, Metric::ItersG, Metric::MessagesF, Metric::MessagesG], threads)
}

pub fn run_accuracy_sweep(spec: &ExperimentSpec, threads: usize) -> Result<SweepResult> {
    with_default_metrics(spec, &[Metric::ErrDh, Metric::ErrDhRms, Metric::ErrDeltaH, Metric::ErrDeltaHRms], threads)
}

fn with_default_metrics(spec: &ExperimentSpec, metrics: &[Metric], threads: usize) -> Result<SweepResult> {
    if spec.metrics.is_empty() {
        let spec = ExperimentSpec { metrics: metrics.to_vec(), ..spec.clone() };
        run_sweep(&spec, threads)
    } else {
        run_sweep(spec, threads)
    }
}
