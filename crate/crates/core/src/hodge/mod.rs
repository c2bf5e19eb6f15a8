//! Random 1-forms and the gossip Hodge decomposition `ω = df + δg + h`.
//!
//! Both potentials are found by synchronous Jacobi rounds: every node (for
//! `f`) or face (for `g`) recomputes its value from its neighbors' values of
//! the previous round. Bounded surfaces are solved on their double cover with
//! a mirrored input and read back from sheet 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface::{
    check_len, d0, d1, delta1, delta2, Cochain0, Cochain1, Cochain2, CombinatorialSurface,
    DoubleCover, SurfaceError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeError {
    #[error("invalid gossip configuration: {0}")]
    InvalidConfig(String),
    #[error("the Jacobi solvers need a closed surface; decompose bounded ones via the double cover")]
    NotClosed,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

pub type Result<T> = std::result::Result<T, HodgeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop every node once the largest update of a round is below `eps`.
    #[default]
    Global,
    /// A node stops updating (and sending) once its own update is below `eps`.
    PerNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossipConfig {
    pub eps: f64,
    pub max_rounds: usize,
    pub seed: u64,
    /// Under-relaxation factor in (0, 1].
    pub damping: f64,
    #[serde(default)]
    pub stop_rule: StopRule,
}

impl Default for GossipConfig {
    fn default() -> Self {
        GossipConfig { eps: 1e-8, max_rounds: 1_000_000, seed: 0, damping: 1.0, stop_rule: StopRule::Global }
    }
}

impl GossipConfig {
    pub fn with_eps(eps: f64) -> Self {
        GossipConfig { eps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(HodgeError::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_rounds == 0 {
            return Err(HodgeError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(HodgeError::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Outcome of one Jacobi solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solve<T> {
    pub value: T,
    pub iters: usize,
    pub converged: bool,
    /// Neighbor messages sent over all rounds.
    pub messages: u64,
}

/// Per-node uniform draws `u_i` in `[-1, 1]` turned into `(u_i + u_j) / 2`
/// on each canonical edge `i -> j`.
pub fn random_one_form(s: &CombinatorialSurface, seed: u64) -> Cochain1 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..s.n_nodes()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    one_form_from_node_values(s, &u)
}

pub fn one_form_from_node_values(s: &CombinatorialSurface, u: &[f64]) -> Cochain1 {
    assert_eq!(u.len(), s.n_nodes(), "one value per node");
    Cochain1::from_values(s.edges().iter().map(|&[i, j]| 0.5 * (u[i] + u[j])).collect())
}

/// Sparse neighbor lists with a right-hand side, shared by both solvers.
struct JacobiSystem {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    rhs: Vec<f64>,
}

impl JacobiSystem {
    fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Runs `x_i <- (sum_j x_j + rhs_i) / deg_i` from zero.
    fn run(&self, cfg: &GossipConfig) -> Solve<Vec<f64>> {
        let n = self.rhs.len();
        let mut x = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut active = vec![true; n];
        let mut n_active = n;
        let alpha = cfg.damping;
        let mut messages = 0u64;
        let mut iters = 0;
        let mut converged = false;
        while iters < cfg.max_rounds {
            iters += 1;
            let mut biggest: f64 = 0.0;
            for i in 0..n {
                if !active[i] {
                    next[i] = x[i];
                    continue;
                }
                let nb = &self.neighbors[self.offsets[i]..self.offsets[i + 1]];
                messages += nb.len() as u64;
                let sum: f64 = nb.iter().map(|&j| x[j]).sum();
                let target = (sum + self.rhs[i]) / nb.len() as f64;
                next[i] = if alpha == 1.0 { target } else { x[i] + alpha * (target - x[i]) };
                biggest = biggest.max((next[i] - x[i]).abs());
            }
            if cfg.stop_rule == StopRule::PerNode {
                for i in 0..n {
                    if active[i] && (next[i] - x[i]).abs() < cfg.eps {
                        active[i] = false;
                        n_active -= 1;
                    }
                }
            }
            std::mem::swap(&mut x, &mut next);
            let done = match cfg.stop_rule {
                StopRule::Global => biggest < cfg.eps,
                StopRule::PerNode => n_active == 0,
            };
            if done {
                converged = true;
                break;
            }
        }
        Solve { value: x, iters, converged, messages }
    }
}

fn node_system(s: &CombinatorialSurface, w: &Cochain1) -> JacobiSystem {
    let b = delta1(s, w);
    let mut offsets = Vec::with_capacity(s.n_nodes() + 1);
    let mut neighbors = Vec::with_capacity(2 * s.n_edges());
    offsets.push(0);
    for v in 0..s.n_nodes() {
        neighbors.extend(s.star(v).iter().map(|inc| inc.neighbor));
        offsets.push(neighbors.len());
    }
    JacobiSystem { offsets, neighbors, rhs: b.values().iter().map(|x| -x).collect() }
}

fn face_system(s: &CombinatorialSurface, w: &Cochain1) -> JacobiSystem {
    let curl = d1(s, w);
    let mut offsets = Vec::with_capacity(s.n_faces() + 1);
    let mut neighbors = Vec::with_capacity(3 * s.n_faces());
    offsets.push(0);
    for f in 0..s.n_faces() {
        let start = neighbors.len();
        neighbors.extend(s.dual_neighbors(f));
        neighbors[start..].sort_unstable();
        offsets.push(neighbors.len());
    }
    JacobiSystem { offsets, neighbors, rhs: curl.into_values() }
}

fn check_closed(s: &CombinatorialSurface, w: &Cochain1, cfg: &GossipConfig) -> Result<()> {
    cfg.validate()?;
    check_len(w.len(), s.n_edges())?;
    if !s.is_closed() {
        return Err(HodgeError::NotClosed);
    }
    Ok(())
}

/// Solves `δd f = δω` on a closed surface:
/// `f(v) <- (Σ f(w) - Σ ω(v -> w)) / deg(v)`.
pub fn solve_f(s: &CombinatorialSurface, w: &Cochain1, cfg: &GossipConfig) -> Result<Solve<Cochain0>> {
    check_closed(s, w, cfg)?;
    let sys = node_system(s, w);
    debug_assert!((0..s.n_nodes()).all(|v| sys.degree(v) > 0));
    let r = sys.run(cfg);
    Ok(Solve { value: Cochain0::from_values(r.value), iters: r.iters, converged: r.converged, messages: r.messages })
}

/// Solves `dδg = dω` on a closed surface over the dual graph:
/// `g(F) <- (Σ g(F') + dω(F)) / |N(F)|`.
pub fn solve_g(s: &CombinatorialSurface, w: &Cochain1, cfg: &GossipConfig) -> Result<Solve<Cochain2>> {
    check_closed(s, w, cfg)?;
    let r = face_system(s, w).run(cfg);
    Ok(Solve { value: Cochain2::from_values(r.value), iters: r.iters, converged: r.converged, messages: r.messages })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub dh_max: f64,
    pub dh_rms: f64,
    pub delta_h_max: f64,
    pub delta_h_rms: f64,
}

/// Curl of `h` over all faces and divergence over nodes; on a bounded
/// surface only interior nodes count.
pub fn residual_norms(h: &Cochain1, s: &CombinatorialSurface) -> Residuals {
    let curl = d1(s, h);
    let div = delta1(s, h);
    let div = if s.is_closed() {
        div
    } else {
        Cochain0::from_values(
            (0..s.n_nodes()).filter(|&v| !s.is_boundary_node(v)).map(|v| div[v]).collect(),
        )
    };
    Residuals {
        dh_max: curl.max_abs(),
        dh_rms: curl.rms(),
        delta_h_max: div.max_abs(),
        delta_h_rms: div.rms(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub f: Cochain0,
    pub g: Cochain2,
    pub df: Cochain1,
    /// The coexact part `δg`.
    pub dg: Cochain1,
    pub h: Cochain1,
    pub iters_f: usize,
    pub iters_g: usize,
    pub err_dh: f64,
    pub err_delta_h: f64,
    pub residuals: Residuals,
    pub converged_f: bool,
    pub converged_g: bool,
    pub messages_f: u64,
    pub messages_g: u64,
}

impl DecompositionResult {
    pub fn converged(&self) -> bool {
        self.converged_f && self.converged_g
    }
}

/// Decomposes 1-forms on one surface, building the double cover once when
/// the surface is bounded.
#[derive(Debug, Clone)]
pub struct HodgeSolver<'a> {
    surface: &'a CombinatorialSurface,
    cover: Option<DoubleCover>,
}

impl<'a> HodgeSolver<'a> {
    pub fn new(surface: &'a CombinatorialSurface) -> Result<Self> {
        let cover = if surface.is_closed() { None } else { Some(DoubleCover::new(surface)?) };
        Ok(HodgeSolver { surface, cover })
    }

    pub fn surface(&self) -> &CombinatorialSurface {
        self.surface
    }

    pub fn cover(&self) -> Option<&DoubleCover> {
        self.cover.as_ref()
    }

    /// The closed surface the solvers actually run on.
    pub fn working_surface(&self) -> &CombinatorialSurface {
        self.cover.as_ref().map_or(self.surface, DoubleCover::cover)
    }

    pub fn decompose(&self, w: &Cochain1, cfg: &GossipConfig) -> Result<DecompositionResult> {
        cfg.validate()?;
        check_len(w.len(), self.surface.n_edges())?;
        let Some(m) = &self.cover else {
            return decompose_closed(self.surface, w, cfg);
        };
        let lifted = m.mirror_one_form(w);
        let full = decompose_closed(m.cover(), &lifted, cfg)?;
        let f = m.restrict_zero_form(&full.f).value;
        let g = m.restrict_two_form(&full.g).value;
        let df = m.restrict_one_form(&full.df).value;
        let dg = m.restrict_one_form(&full.dg).value;
        let h = w.sub(&df).sub(&dg);
        Ok(DecompositionResult { f, g, df, dg, h, ..full })
    }
}

fn decompose_closed(s: &CombinatorialSurface, w: &Cochain1, cfg: &GossipConfig) -> Result<DecompositionResult> {
    let fs = solve_f(s, w, cfg)?;
    let gs = solve_g(s, w, cfg)?;
    let df = d0(s, &fs.value);
    let dg = delta2(s, &gs.value);
    let h = w.sub(&df).sub(&dg);
    let residuals = residual_norms(&h, s);
    Ok(DecompositionResult {
        f: fs.value,
        g: gs.value,
        df,
        dg,
        h,
        iters_f: fs.iters,
        iters_g: gs.iters,
        err_dh: residuals.dh_max,
        err_delta_h: residuals.delta_h_max,
        residuals,
        converged_f: fs.converged,
        converged_g: gs.converged,
        messages_f: fs.messages,
        messages_g: gs.messages,
    })
}

/// One-shot decomposition. Residuals of a bounded surface are measured on
/// its double cover, where the solve happens.
pub fn decompose(s: &CombinatorialSurface, w: &Cochain1, cfg: &GossipConfig) -> Result<DecompositionResult> {
    HodgeSolver::new(s)?.decompose(w, cfg)
}

#[cfg(test)]
mod tests;
