//! Coboundary and codifferential operators.
//!
//! Sign conventions: `d0 f (u -> v) = f(v) - f(u)`; `delta2 g` on a canonical
//! edge is `g(left) - g(right)`, with a missing face read as zero.

use super::{Cochain0, Cochain1, Cochain2, CombinatorialSurface};

pub fn d0(s: &CombinatorialSurface, f: &Cochain0) -> Cochain1 {
    assert_eq!(f.len(), s.n_nodes(), "0-cochain length");
    let values = s.edges().iter().map(|&[tail, head]| f[head] - f[tail]).collect();
    Cochain1::from_values(values)
}

/// Sum of the form around each face's counterclockwise boundary.
pub fn d1(s: &CombinatorialSurface, w: &Cochain1) -> Cochain2 {
    assert_eq!(w.len(), s.n_edges(), "1-cochain length");
    let values = (0..s.n_faces())
        .map(|f| {
            let [a, b, c] = s.face_edges(f);
            w.along(*a) + w.along(*b) + w.along(*c)
        })
        .collect();
    Cochain2::from_values(values)
}

/// Sum of the form over all edges leaving each node.
pub fn delta1(s: &CombinatorialSurface, w: &Cochain1) -> Cochain0 {
    assert_eq!(w.len(), s.n_edges(), "1-cochain length");
    let values = (0..s.n_nodes())
        .map(|v| s.star(v).iter().map(|inc| w.along(inc.away())).sum())
        .collect();
    Cochain0::from_values(values)
}

pub fn delta2(s: &CombinatorialSurface, g: &Cochain2) -> Cochain1 {
    assert_eq!(g.len(), s.n_faces(), "2-cochain length");
    let values = (0..s.n_edges())
        .map(|e| {
            let [left, right] = s.edge_faces(e);
            left.map_or(0.0, |f| g[f]) - right.map_or(0.0, |f| g[f])
        })
        .collect();
    Cochain1::from_values(values)
}
