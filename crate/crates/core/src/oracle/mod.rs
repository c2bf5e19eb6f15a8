//! Centralized reference machinery: exact Hodge solves, the dimension of
//! the harmonic space, integer homology signatures from a tree-cotree split,
//! and geometric winding numbers.

mod cg;
mod treecotree;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::hodge::{residual_norms, DecompositionResult};
use crate::surface::{
    check_len, d0, d1, delta1, delta2, Cochain0, Cochain1, Cochain2, CombinatorialSurface,
    SurfaceError,
};

pub use cg::{conjugate_gradient, CgOutcome};
pub use treecotree::{HomologySignature, TreeCotree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("direct_solve needs a closed surface; use direct_solve_bounded or a double cover")]
    NotClosed,
    #[error("conjugate gradient stalled on the {system} system (residual {residual:e})")]
    Breakdown { system: &'static str, residual: f64 },
    #[error("surface too large for the dense oracle: {what} = {got} exceeds {limit}")]
    TooLarge { what: &'static str, got: usize, limit: usize },
    #[error("walk is not closed: starts at {start}, ends at {end}")]
    NotClosedWalk { start: usize, end: usize },
    #[error("surface has no coordinates")]
    NoCoordinates,
    #[error("cycle passes through anchor {0}")]
    ThroughAnchor(usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

pub const DIRECT_NODE_LIMIT: usize = 20_000;
pub const HARMONIC_DIM_EDGE_LIMIT: usize = 2000;
const CG_TOL: f64 = 1e-12;

/// Exact decomposition on a closed surface. `f` solves `L0 f = -δω` on the
/// node graph and `g` solves `(3I - A) g = dω` on the dual graph; both by
/// conjugate gradients with the constant component projected out.
pub fn direct_solve(s: &CombinatorialSurface, w: &Cochain1) -> Result<DecompositionResult> {
    if !s.is_closed() {
        return Err(OracleError::NotClosed);
    }
    solve(s, w)
}

/// Exact decomposition on a bounded surface without doubling it: a missing
/// face across a boundary edge reads as zero, which makes the face system
/// nonsingular.
pub fn direct_solve_bounded(s: &CombinatorialSurface, w: &Cochain1) -> Result<DecompositionResult> {
    solve(s, w)
}

fn solve(s: &CombinatorialSurface, w: &Cochain1) -> Result<DecompositionResult> {
    check_len(w.len(), s.n_edges())?;
    if s.n_nodes() > DIRECT_NODE_LIMIT {
        return Err(OracleError::TooLarge { what: "nodes", got: s.n_nodes(), limit: DIRECT_NODE_LIMIT });
    }
    let mut b = delta1(s, w).into_values();
    for x in &mut b {
        *x = -*x;
    }
    remove_mean(&mut b);
    let node_op = |x: &[f64], y: &mut [f64]| {
        for v in 0..s.n_nodes() {
            let star = s.star(v);
            y[v] = star.len() as f64 * x[v] - star.iter().map(|inc| x[inc.neighbor]).sum::<f64>();
        }
    };
    let fo = conjugate_gradient(node_op, &b, CG_TOL, 20 * s.n_nodes() + 100);
    if !fo.converged {
        return Err(OracleError::Breakdown { system: "node", residual: fo.residual });
    }
    let mut c = d1(s, w).into_values();
    if s.is_closed() {
        remove_mean(&mut c);
    }
    let face_op = |x: &[f64], y: &mut [f64]| {
        for f in 0..s.n_faces() {
            y[f] = 3.0 * x[f] - s.dual_neighbors(f).map(|n| x[n]).sum::<f64>();
        }
    };
    let go = conjugate_gradient(face_op, &c, CG_TOL, 20 * s.n_faces() + 100);
    if !go.converged {
        return Err(OracleError::Breakdown { system: "face", residual: go.residual });
    }
    let f = Cochain0::from_values(fo.x);
    let g = Cochain2::from_values(go.x);
    let df = d0(s, &f);
    let dg = delta2(s, &g);
    let h = w.sub(&df).sub(&dg);
    let residuals = residual_norms(&h, s);
    Ok(DecompositionResult {
        f,
        g,
        df,
        dg,
        h,
        iters_f: fo.iters,
        iters_g: go.iters,
        err_dh: residuals.dh_max,
        err_delta_h: residuals.delta_h_max,
        residuals,
        converged_f: true,
        converged_g: true,
        messages_f: 0,
        messages_g: 0,
    })
}

fn remove_mean(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v {
        *x -= mean;
    }
}

/// Dimension of the space of harmonic 1-forms, `E - rank(L0) - rank(D1 D1ᵀ)`.
/// Ranks count eigenvalues above `1e-8` times the largest one.
pub fn harmonic_dim(s: &CombinatorialSurface) -> Result<usize> {
    if s.n_edges() > HARMONIC_DIM_EDGE_LIMIT {
        return Err(OracleError::TooLarge {
            what: "edges",
            got: s.n_edges(),
            limit: HARMONIC_DIM_EDGE_LIMIT,
        });
    }
    let v = s.n_nodes();
    let mut l0 = DMatrix::<f64>::zeros(v, v);
    for &[a, b] in s.edges() {
        l0[(a, a)] += 1.0;
        l0[(b, b)] += 1.0;
        l0[(a, b)] -= 1.0;
        l0[(b, a)] -= 1.0;
    }
    let nf = s.n_faces();
    let mut l2 = DMatrix::<f64>::zeros(nf, nf);
    for e in 0..s.n_edges() {
        let [left, right] = s.edge_faces(e);
        if let Some(l) = left {
            l2[(l, l)] += 1.0;
        }
        if let Some(r) = right {
            l2[(r, r)] += 1.0;
        }
        if let (Some(l), Some(r)) = (left, right) {
            l2[(l, r)] -= 1.0;
            l2[(r, l)] -= 1.0;
        }
    }
    Ok(s.n_edges() - numerical_rank(l0) - numerical_rank(l2))
}

pub(crate) fn numerical_rank(m: DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if top == 0.0 {
        return 0;
    }
    eig.eigenvalues.iter().filter(|x| x.abs() > 1e-8 * top).count()
}

/// Integer homology signature of a closed node walk.
pub fn tree_cotree_signature(cycle: &[usize], s: &CombinatorialSurface) -> Result<HomologySignature> {
    TreeCotree::new(s).signature(s, cycle)
}

/// Signed angle swept by the closed polygon `points` around `anchor`, in
/// turns.
pub fn winding_turns(points: &[[f64; 2]], anchor: [f64; 2]) -> Option<f64> {
    let mut total = 0.0;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        let (ax, ay) = (a[0] - anchor[0], a[1] - anchor[1]);
        let (bx, by) = (b[0] - anchor[0], b[1] - anchor[1]);
        if ax.hypot(ay) < 1e-12 {
            return None;
        }
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    Some(total / std::f64::consts::TAU)
}

/// Winding number of a closed node walk around each anchor point. The walk
/// may repeat its first node at the end.
pub fn winding_geometric(
    cycle: &[usize],
    s: &CombinatorialSurface,
    anchors: &[[f64; 2]],
) -> Result<Vec<i64>> {
    let nodes = closed_body(cycle)?;
    let mut pts = Vec::with_capacity(nodes.len());
    for &n in nodes {
        pts.push(s.position2(n).ok_or(OracleError::NoCoordinates)?);
    }
    anchors
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            winding_turns(&pts, a).map(|t| t.round() as i64).ok_or(OracleError::ThroughAnchor(i))
        })
        .collect()
}

/// Drops the repeated closing node of a closed walk.
pub(crate) fn closed_body(cycle: &[usize]) -> Result<&[usize]> {
    match (cycle.first(), cycle.last()) {
        (Some(&a), Some(&b)) if a == b => Ok(&cycle[..cycle.len() - 1]),
        (Some(&a), Some(&b)) => Err(OracleError::NotClosedWalk { start: a, end: b }),
        _ => Err(OracleError::NotClosedWalk { start: 0, end: 0 }),
    }
}

#[cfg(test)]
mod tests;
