use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hodge::random_one_form;
use crate::netgen::{grid_domain, torus, waypoint_cycle, DomainSpec};
use crate::surface::DoubleCover;

fn disk(n: usize) -> CombinatorialSurface {
    let spec = DomainSpec { holes: vec![], ..DomainSpec::scattered(0, n, 1) };
    grid_domain(&spec).unwrap().surface
}

fn domain(k: usize, n: usize, seed: u64) -> crate::netgen::Domain {
    grid_domain(&DomainSpec::scattered(k, n, seed)).unwrap()
}

/// Nullity of the assembled `D0 D0ᵀ + D1ᵀ D1` on edges.
fn full_laplacian_nullity(s: &CombinatorialSurface) -> usize {
    let (e, v, f) = (s.n_edges(), s.n_nodes(), s.n_faces());
    let mut dd0 = DMatrix::<f64>::zeros(e, v);
    for (i, &[a, b]) in s.edges().iter().enumerate() {
        dd0[(i, a)] = -1.0;
        dd0[(i, b)] = 1.0;
    }
    let mut dd1 = DMatrix::<f64>::zeros(f, e);
    for face in 0..f {
        for d in s.face_edges(face) {
            dd1[(face, d.edge)] = if d.forward { 1.0 } else { -1.0 };
        }
    }
    let lap = &dd0 * dd0.transpose() + dd1.transpose() * &dd1;
    e - numerical_rank(lap)
}

#[test]
fn direct_solve_zero_and_closed_only() {
    let s = torus(5, 5, 0).unwrap();
    let r = direct_solve(&s, &Cochain1::zeros(s.n_edges())).unwrap();
    assert_eq!(r.h.max_abs(), 0.0);
    assert_eq!(r.f.max_abs(), 0.0);
    let d = domain(1, 60, 0);
    assert_eq!(direct_solve(&d.surface, &random_one_form(&d.surface, 0)).unwrap_err(), OracleError::NotClosed);
}

#[test]
fn direct_solve_is_exact() {
    for (nx, ny, seed) in [(4, 3, 0), (9, 7, 1), (14, 14, 2)] {
        let s = torus(nx, ny, seed).unwrap();
        let r = direct_solve(&s, &random_one_form(&s, seed)).unwrap();
        assert!(r.err_dh <= 1e-9 && r.err_delta_h <= 1e-9, "{:?}", r.residuals);
        assert!(r.h.max_abs() > 1e-3);
    }
}

#[test]
fn bounded_direct_solve_is_harmonic_inside() {
    let d = domain(2, 200, 4);
    let s = &d.surface;
    let r = direct_solve_bounded(s, &random_one_form(s, 3)).unwrap();
    assert!(r.err_dh <= 1e-9 && r.err_delta_h <= 1e-9, "{:?}", r.residuals);
}

#[test]
fn harmonic_dim_examples() {
    assert_eq!(harmonic_dim(&disk(60)).unwrap(), 0);
    let annulus = domain(1, 80, 2).surface;
    assert_eq!(harmonic_dim(&annulus).unwrap(), 1);
    let cover = DoubleCover::new(&annulus).unwrap();
    assert_eq!(cover.cover().genus(), 1);
    assert_eq!(harmonic_dim(cover.cover()).unwrap(), 2);
    assert_eq!(harmonic_dim(&torus(6, 5, 1).unwrap()).unwrap(), 2);
}

#[test]
fn harmonic_dim_matches_full_laplacian() {
    for s in [disk(40), domain(1, 50, 1).surface, domain(2, 90, 3).surface, torus(5, 4, 2).unwrap()] {
        assert!(s.n_edges() <= 300);
        assert_eq!(harmonic_dim(&s).unwrap(), full_laplacian_nullity(&s));
    }
}

#[test]
fn harmonic_dim_refuses_large_meshes() {
    let s = disk(1500);
    assert!(matches!(harmonic_dim(&s), Err(OracleError::TooLarge { what: "edges", .. })));
}

#[test]
fn tree_cotree_rank_is_betti() {
    for k in [0, 1, 3, 5] {
        let d = domain(k, 300, k as u64);
        let tc = TreeCotree::new(&d.surface);
        assert_eq!(tc.rank(), k);
        assert_eq!(tc.fundamental_cycles(&d.surface).len(), k);
    }
    let t = torus(7, 6, 0).unwrap();
    assert_eq!(TreeCotree::new(&t).rank(), 2);
}

#[test]
fn generator_cocycles_are_dual_to_generators() {
    let t = torus(6, 6, 3).unwrap();
    let tc = TreeCotree::new(&t);
    for (i, &g) in tc.generators().iter().enumerate() {
        for j in 0..tc.rank() {
            assert_eq!(tc.cocycle_value(j, g), i64::from(i == j));
        }
    }
    // fundamental cycles pick out their own generator
    for (i, c) in tc.fundamental_cycles(&t).iter().enumerate() {
        let mut closed = c.clone();
        closed.push(c[0]);
        let sig = tc.signature(&t, &closed).unwrap();
        let expect: Vec<i64> = (0..tc.rank()).map(|j| i64::from(i == j)).collect();
        assert_eq!(sig.0, expect);
    }
}

#[test]
fn signatures_of_face_boundaries_vanish() {
    for s in [domain(3, 200, 1).surface, torus(5, 5, 1).unwrap()] {
        let tc = TreeCotree::new(&s);
        for f in s.faces() {
            let sig = tc.signature(&s, &[f[0], f[1], f[2], f[0]]).unwrap();
            assert!(sig.is_zero());
        }
    }
}

#[test]
fn hole_loop_signatures_are_independent_and_linear() {
    let d = domain(3, 300, 5);
    let s = &d.surface;
    let tc = TreeCotree::new(s);
    let mut rows = Vec::new();
    for l in s.hole_loops() {
        let mut once = l.clone();
        once.push(l[0]);
        let sig = tc.signature(s, &once).unwrap();
        assert!(!sig.is_zero());
        let mut twice = once.clone();
        twice.extend_from_slice(&l[1..]);
        twice.push(l[0]);
        assert_eq!(tc.signature(s, &twice).unwrap(), sig.add(&sig));
        rows.push(sig.0);
    }
    let m = DMatrix::from_fn(3, 3, |i, j| rows[i][j] as f64);
    assert!(m.determinant().abs() > 0.5);
}

#[test]
fn signature_needs_a_closed_walk() {
    let s = torus(4, 4, 0).unwrap();
    let e = s.edges()[0];
    assert!(matches!(tree_cotree_signature(&[e[0], e[1]], &s), Err(OracleError::NotClosedWalk { .. })));
}

#[test]
fn winding_turns_examples() {
    let square = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    assert!((winding_turns(&square, [0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    let cw: Vec<[f64; 2]> = square.iter().rev().copied().collect();
    assert!((winding_turns(&cw, [0.0, 0.0]).unwrap() + 1.0).abs() < 1e-12);
    assert!(winding_turns(&square, [5.0, 0.0]).unwrap().abs() < 1e-12);
    assert_eq!(winding_turns(&square, [1.0, 1.0]), None);
}

#[test]
fn hole_loops_wind_once_around_their_own_anchor() {
    let d = domain(3, 300, 6);
    let s = &d.surface;
    for (i, l) in s.hole_loops().iter().enumerate() {
        let mut closed = l.clone();
        closed.push(l[0]);
        let w = winding_geometric(&closed, s, &d.truth.anchors).unwrap();
        let expect: Vec<i64> = (0..3).map(|j| i64::from(i == j)).collect();
        assert_eq!(w, expect);
    }
    let t = torus(4, 4, 0).unwrap();
    let bare = crate::surface::build_surface(t.faces(), None, None).unwrap();
    let [a, b] = bare.edges()[0];
    assert_eq!(winding_geometric(&[a, b, a], &bare, &[[0.0, 0.0]]).unwrap_err(), OracleError::NoCoordinates);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn signatures_add_under_concatenation(seed in 0u64..10_000) {
        let d = domain(2, 150, seed % 7);
        let s = &d.surface;
        let tc = TreeCotree::new(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = seed as usize % s.n_nodes();
        let a = waypoint_cycle(s, start, 2, &mut rng).unwrap();
        let b = waypoint_cycle(s, start, 2, &mut rng).unwrap();
        let mut ab = a.clone();
        ab.extend_from_slice(&b[1..]);
        let sa = tc.signature(s, &a).unwrap();
        let sb = tc.signature(s, &b).unwrap();
        prop_assert_eq!(tc.signature(s, &ab).unwrap(), sa.add(&sb));
        // tree-cotree classes agree with geometric windings
        let ga = winding_geometric(&a, s, &d.truth.anchors);
        let gb = winding_geometric(&b, s, &d.truth.anchors);
        if let (Ok(ga), Ok(gb)) = (ga, gb) {
            prop_assert_eq!(sa == sb, ga == gb);
        }
    }
}
