//! Harmonic 1-form bases from repeated randomized decompositions, hole
//! counting by rank tests, and canonicalization against hole loops.

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hodge::{random_one_form, GossipConfig, HodgeError, HodgeSolver};
use crate::oracle::TreeCotree;
use crate::surface::io::{read_cochain1, write_cochain1};
use crate::surface::{Cochain1, CombinatorialSurface, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("the surface has trivial first homology; no harmonic 1-forms exist")]
    TrivialHomology,
    #[error("asked for {requested} probe edges but the surface has {available}")]
    TooFewEdges { requested: usize, available: usize },
    #[error("decomposition for seed {seed} did not converge")]
    NotConverged { seed: u64 },
    #[error("period matrix is numerically singular (condition number {cond:e})")]
    SingularPeriods { cond: f64 },
    #[error("{forms} forms but {loops} hole loops")]
    LoopCount { forms: usize, loops: usize },
    #[error("basis was built for surface {basis}, not {surface}")]
    WrongSurface { basis: String, surface: String },
    #[error("basis file: {0}")]
    Format(String),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

pub type Result<T> = std::result::Result<T, BasisError>;

pub const DEFAULT_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    pub forms: Vec<Cochain1>,
    pub eps: f64,
    pub seeds: Vec<u64>,
    pub canonical: bool,
    /// `period_matrix[i][j]` is the period of form `j` over hole loop `i`.
    pub period_matrix: Option<Vec<Vec<f64>>>,
    pub surface_hash: String,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn check_surface(&self, s: &CombinatorialSurface) -> Result<()> {
        let h = s.hash();
        if h != self.surface_hash {
            return Err(BasisError::WrongSurface { basis: self.surface_hash.clone(), surface: h });
        }
        Ok(())
    }

    /// JSON document with each form embedded as a cochain text block.
    pub fn to_json(&self, s: &CombinatorialSurface) -> Result<String> {
        self.check_surface(s)?;
        let forms = self.forms.iter().map(|f| write_cochain1(s, f)).collect::<std::result::Result<Vec<_>, _>>()?;
        let doc = BasisFile {
            surface_hash: self.surface_hash.clone(),
            eps: self.eps,
            seeds: self.seeds.clone(),
            canonical: self.canonical,
            period_matrix: self.period_matrix.clone(),
            forms,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| BasisError::Format(e.to_string()))
    }

    pub fn from_json(s: &CombinatorialSurface, text: &str) -> Result<Self> {
        let doc: BasisFile = serde_json::from_str(text).map_err(|e| BasisError::Format(e.to_string()))?;
        let forms = doc.forms.iter().map(|t| read_cochain1(s, t)).collect::<std::result::Result<Vec<_>, _>>()?;
        let b = HarmonicBasis {
            forms,
            eps: doc.eps,
            seeds: doc.seeds,
            canonical: doc.canonical,
            period_matrix: doc.period_matrix,
            surface_hash: doc.surface_hash,
        };
        b.check_surface(s)?;
        Ok(b)
    }
}

#[derive(Serialize, Deserialize)]
struct BasisFile {
    surface_hash: String,
    eps: f64,
    seeds: Vec<u64>,
    canonical: bool,
    period_matrix: Option<Vec<Vec<f64>>>,
    forms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisOptions {
    /// Consecutive rank-preserving candidates needed to stop.
    pub confirmations: usize,
    /// Node whose neighborhood supplies the probe edges.
    pub probe_node: usize,
    /// Also test rank on periods over a homology cycle basis; when enabled
    /// this check decides and the local test is only audited.
    pub global_check: bool,
    pub rank_tol: f64,
    /// Safety cap on candidate forms beyond the first Betti number.
    pub extra_candidates: usize,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions {
            confirmations: 5,
            probe_node: 0,
            global_check: true,
            rank_tol: DEFAULT_RANK_TOL,
            extra_candidates: 100,
        }
    }
}

/// Diagnostics of one basis build.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BuildReport {
    pub candidates: usize,
    /// Candidates where the local probe test and the global check disagreed.
    pub local_disagreements: usize,
    pub iters_f: Vec<usize>,
    pub iters_g: Vec<usize>,
}

/// Edges around `v` in order of hop distance (the nearer endpoint's BFS
/// distance), ties broken by edge id.
pub fn probe_edges(s: &CombinatorialSurface, v: usize, m_prime: usize) -> Result<Vec<usize>> {
    if m_prime == 0 || m_prime > s.n_edges() {
        return Err(BasisError::TooFewEdges { requested: m_prime, available: s.n_edges() });
    }
    if v >= s.n_nodes() {
        return Err(SurfaceError::UnknownNode(v).into());
    }
    let dist = s.bfs_distances(v);
    let mut order: Vec<(usize, usize)> =
        s.edges().iter().enumerate().map(|(e, &[a, b])| (dist[a].min(dist[b]), e)).collect();
    order.sort_unstable();
    Ok(order.into_iter().take(m_prime).map(|(_, e)| e).collect())
}

/// Numerical rank of the matrix whose column `j` is `forms[j]` sampled on
/// `probes`.
pub fn independence_rank(forms: &[&Cochain1], probes: &[usize], tol: f64) -> usize {
    let m = DMatrix::from_fn(probes.len(), forms.len(), |i, j| forms[j][probes[i]]);
    matrix_rank(m, tol)
}

/// Gaussian elimination with complete pivoting; pivots below `tol` times
/// the largest column norm count as zero.
pub fn matrix_rank(mut m: DMatrix<f64>, tol: f64) -> usize {
    let (rows, cols) = m.shape();
    let scale = (0..cols).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let threshold = tol * scale;
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (0.0, rank, rank);
        for j in rank..cols {
            for i in rank..rows {
                let a = m[(i, j)].abs();
                if a > best.0 {
                    best = (a, i, j);
                }
            }
        }
        if best.0 <= threshold {
            break;
        }
        m.swap_rows(rank, best.1);
        m.swap_columns(rank, best.2);
        let p = m[(rank, rank)];
        for i in rank + 1..rows {
            let factor = m[(i, rank)] / p;
            if factor != 0.0 {
                for j in rank..cols {
                    let v = m[(rank, j)];
                    m[(i, j)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Period of `w` over each node cycle (closing hop implied).
pub fn periods(s: &CombinatorialSurface, w: &Cochain1, loops: &[Vec<usize>]) -> Result<Vec<f64>> {
    loops.iter().map(|l| Ok(w.sum_along(&s.cycle_walk(l)?))).collect()
}

/// `Λ[i][j]` = period of `forms[j]` over `loops[i]`.
pub fn period_matrix(s: &CombinatorialSurface, forms: &[Cochain1], loops: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
    let cols = forms.iter().map(|f| periods(s, f, loops)).collect::<Result<Vec<_>>>()?;
    Ok((0..loops.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
}

/// Cycles spanning first homology: the hole loops on planar domains,
/// otherwise one fundamental cycle per tree-cotree generator.
pub fn homology_cycles(s: &CombinatorialSurface) -> Vec<Vec<usize>> {
    let holes = s.hole_loops();
    if holes.len() == s.betti1() {
        holes
    } else {
        TreeCotree::new(s).fundamental_cycles(s)
    }
}

/// Repeatedly decomposes random 1-forms and keeps harmonic parts that raise
/// the rank, until `confirmations` candidates in a row add nothing.
pub fn build_basis(s: &CombinatorialSurface, cfg: &GossipConfig, opts: &BasisOptions) -> Result<HarmonicBasis> {
    build_basis_with_report(s, cfg, opts).map(|r| r.0)
}

pub fn build_basis_with_report(
    s: &CombinatorialSurface,
    cfg: &GossipConfig,
    opts: &BasisOptions,
) -> Result<(HarmonicBasis, BuildReport)> {
    let solver = HodgeSolver::new(s)?;
    let cycles = if opts.global_check { Some(homology_cycles(s)) } else { None };
    let mut forms: Vec<Cochain1> = Vec::new();
    let mut seeds = Vec::new();
    let mut report = BuildReport::default();
    let mut streak = 0;
    let cap = s.betti1() + opts.confirmations + opts.extra_candidates;
    let mut candidate = 0u64;
    while streak < opts.confirmations && report.candidates < cap {
        let seed = cfg.seed.wrapping_add(candidate);
        candidate += 1;
        report.candidates += 1;
        let w = random_one_form(s, seed);
        let r = solver.decompose(&w, &GossipConfig { seed, ..*cfg })?;
        if !r.converged() {
            return Err(BasisError::NotConverged { seed });
        }
        report.iters_f.push(r.iters_f);
        report.iters_g.push(r.iters_g);
        let k = forms.len();
        let m_prime = (2 * (k + 1)).max(8).min(s.n_edges());
        let probes = probe_edges(s, opts.probe_node, m_prime)?;
        let mut all: Vec<&Cochain1> = forms.iter().collect();
        all.push(&r.h);
        let local_up = independence_rank(&all, &probes, opts.rank_tol) > k;
        let up = match &cycles {
            Some(cycles) => {
                let cols: Vec<Vec<f64>> =
                    all.iter().map(|f| periods(s, f, cycles)).collect::<Result<_>>()?;
                let m = DMatrix::from_fn(cycles.len(), cols.len(), |i, j| cols[j][i]);
                let global_up = matrix_rank(m, opts.rank_tol) > k;
                if global_up != local_up {
                    report.local_disagreements += 1;
                }
                global_up
            }
            None => local_up,
        };
        debug!("candidate seed {seed}: rank {} -> {}", k, if up { k + 1 } else { k });
        if up {
            forms.push(r.h);
            seeds.push(seed);
            streak = 0;
        } else {
            streak += 1;
        }
    }
    if forms.is_empty() {
        return Err(BasisError::TrivialHomology);
    }
    let holes = s.hole_loops();
    let period_matrix = if holes.is_empty() { None } else { Some(period_matrix(s, &forms, &holes)?) };
    let basis = HarmonicBasis {
        forms,
        eps: cfg.eps,
        seeds,
        canonical: false,
        period_matrix,
        surface_hash: s.hash(),
    };
    Ok((basis, report))
}

pub const MAX_CONDITION: f64 = 1e8;

/// Recombines the forms so that form `i` has period 1 over hole loop `i` and
/// 0 over the others: with `Λ[i][j] = ⟨ω_j, l_i⟩`, `η = (Λᵀ)⁻¹ ω`.
pub fn canonicalize(b: &HarmonicBasis, s: &CombinatorialSurface) -> Result<HarmonicBasis> {
    b.check_surface(s)?;
    let loops = s.hole_loops();
    let k = b.forms.len();
    if loops.len() != k {
        return Err(BasisError::LoopCount { forms: k, loops: loops.len() });
    }
    let lam = period_matrix(s, &b.forms, &loops)?;
    let m = DMatrix::from_fn(k, k, |i, j| lam[i][j]);
    let sv = m.clone().svd(false, false).singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if !(cond <= MAX_CONDITION) {
        return Err(BasisError::SingularPeriods { cond });
    }
    let c = m.transpose().try_inverse().ok_or(BasisError::SingularPeriods { cond })?;
    let forms: Vec<Cochain1> = (0..k)
        .map(|i| {
            let coeffs: Vec<f64> = (0..k).map(|j| c[(i, j)]).collect();
            Cochain1::combination(&b.forms, &coeffs)
        })
        .collect();
    let period_matrix = Some(period_matrix(s, &forms, &loops)?);
    Ok(HarmonicBasis { forms, canonical: true, period_matrix, ..b.clone() })
}

/// Basis size, or 0 when the surface carries no harmonic forms.
pub fn hole_count(s: &CombinatorialSurface, cfg: &GossipConfig) -> Result<usize> {
    match build_basis(s, cfg, &BasisOptions::default()) {
        Ok(b) => Ok(b.len()),
        Err(BasisError::TrivialHomology) => Ok(0),
        Err(e) => Err(e),
    }
}

/// Half the smallest nonzero period magnitude in the period matrix, where
/// nonzero means above `1e-6` of the largest.
pub fn auto_mu(b: &HarmonicBasis) -> Option<f64> {
    let pm = b.period_matrix.as_ref()?;
    let top = pm.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    pm.iter()
        .flatten()
        .map(|x| x.abs())
        .filter(|&x| x > 1e-6 * top)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
        .map(|m| 0.5 * m)
}

#[cfg(test)]
mod tests;
