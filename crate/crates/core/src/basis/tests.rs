use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hodge::GossipConfig;
use crate::netgen::{grid_domain, museum_domain, torus, waypoint_cycle, DomainSpec, MuseumSpec};
use crate::oracle::harmonic_dim;
use crate::surface::{d0, Cochain0};

const EPS: f64 = 1e-8;

fn cfg() -> GossipConfig {
    GossipConfig::with_eps(EPS)
}

fn domain(k: usize, n: usize, seed: u64) -> CombinatorialSurface {
    grid_domain(&DomainSpec::scattered(k, n, seed)).unwrap().surface
}

fn form(s: &CombinatorialSurface, seed: u64) -> Cochain1 {
    crate::hodge::random_one_form(s, seed)
}

#[test]
fn probe_edges_grow_by_hops() {
    let s = torus(6, 6, 0).unwrap();
    let v = (0..s.n_nodes()).find(|&v| s.degree(v) == 6).unwrap();
    let mut incident: Vec<usize> = s.star(v).iter().map(|i| i.edge).collect();
    incident.sort_unstable();
    assert_eq!(probe_edges(&s, v, 4).unwrap(), incident[..4]);

    let d = domain(0, 100, 1);
    let v = (0..d.n_nodes()).find(|&v| d.degree(v) == 3).unwrap();
    let p = probe_edges(&d, v, 5).unwrap();
    let dist = d.bfs_distances(v);
    let hop = |e: usize| dist[d.edges()[e][0]].min(dist[d.edges()[e][1]]);
    assert_eq!(p.iter().filter(|&&e| hop(e) == 0).count(), 3);
    assert_eq!(p.iter().filter(|&&e| hop(e) == 1).count(), 2);

    let e = s.n_edges();
    assert_eq!(probe_edges(&s, 0, e + 1).unwrap_err(), BasisError::TooFewEdges { requested: e + 1, available: e });
    assert!(probe_edges(&s, 0, e).is_ok());
}

#[test]
fn rank_examples() {
    let s = torus(5, 5, 1).unwrap();
    let probes: Vec<usize> = (0..12).collect();
    let w = form(&s, 1);
    let w2 = w.scaled(2.0);
    let other = form(&s, 2);
    assert_eq!(independence_rank(&[&w, &w], &probes, DEFAULT_RANK_TOL), 1);
    assert_eq!(independence_rank(&[&w, &w2, &other], &probes, DEFAULT_RANK_TOL), 2);
    let z = Cochain1::zeros(s.n_edges());
    assert_eq!(independence_rank(&[&z], &probes, DEFAULT_RANK_TOL), 0);
}

#[test]
fn distinct_seeds_give_independent_harmonic_forms() {
    let s = domain(3, 300, 2);
    let solver = crate::hodge::HodgeSolver::new(&s).unwrap();
    let probes = probe_edges(&s, 0, 8).unwrap();
    let mut failures = 0;
    for trial in 0..10u64 {
        let hs: Vec<Cochain1> =
            (0..3).map(|j| solver.decompose(&form(&s, 100 * trial + j), &cfg()).unwrap().h).collect();
        let refs: Vec<&Cochain1> = hs.iter().collect();
        if independence_rank(&refs, &probes, DEFAULT_RANK_TOL) != 3 {
            failures += 1;
        }
    }
    assert!(failures <= 1, "{failures} of 10");
}

#[test]
fn basis_size_is_hole_count() {
    for k in [1, 2, 3] {
        let s = domain(k, 300, 10 + k as u64);
        let (b, report) = build_basis_with_report(&s, &cfg(), &BasisOptions::default()).unwrap();
        assert_eq!(b.len(), k);
        assert_eq!(harmonic_dim(&s).unwrap(), k);
        assert_eq!(report.candidates, k + 5);
        assert_eq!(b.seeds.len(), k);
        assert_eq!(b.surface_hash, s.hash());
        assert!(!b.canonical);
    }
}

#[test]
fn disk_has_trivial_homology() {
    let spec = DomainSpec { holes: vec![], ..DomainSpec::scattered(0, 120, 1) };
    let s = grid_domain(&spec).unwrap().surface;
    assert_eq!(build_basis(&s, &cfg(), &BasisOptions::default()).unwrap_err(), BasisError::TrivialHomology);
    assert_eq!(hole_count(&s, &cfg()).unwrap(), 0);
}

#[test]
fn torus_basis_uses_tree_cotree_cycles() {
    let s = torus(7, 6, 2).unwrap();
    assert_eq!(homology_cycles(&s).len(), 2);
    let b = build_basis(&s, &cfg(), &BasisOptions::default()).unwrap();
    assert_eq!(b.len(), 2);
    assert!(b.period_matrix.is_none());
    assert!(matches!(canonicalize(&b, &s), Err(BasisError::LoopCount { forms: 2, loops: 0 })));
}

#[test]
fn local_only_test_still_finds_the_holes_here() {
    let s = domain(2, 200, 3);
    let opts = BasisOptions { global_check: false, ..BasisOptions::default() };
    assert_eq!(build_basis(&s, &cfg(), &opts).unwrap().len(), 2);
}

#[test]
fn museum_basis_has_five_forms() {
    let m = museum_domain(&MuseumSpec { target_nodes: 700, ..MuseumSpec::default() }).unwrap();
    assert_eq!(hole_count(&m.surface, &cfg()).unwrap(), 5);
}

#[test]
fn exact_forms_have_zero_periods() {
    let s = domain(2, 200, 1);
    let p: Vec<f64> = (0..s.n_nodes()).map(|i| (i as f64).sqrt()).collect();
    let w = d0(&s, &Cochain0::from_values(p));
    for x in periods(&s, &w, &s.hole_loops()).unwrap() {
        assert!(x.abs() <= 1e-12);
    }
}

#[test]
fn canonical_periods_are_the_identity() {
    let s = domain(3, 400, 4);
    let b = build_basis(&s, &cfg(), &BasisOptions::default()).unwrap();
    let raw = b.period_matrix.clone().unwrap();
    assert!(raw.iter().flatten().any(|x| x.abs() > 1e-3));
    let c = canonicalize(&b, &s).unwrap();
    assert!(c.canonical);
    let pm = c.period_matrix.clone().unwrap();
    for (i, row) in pm.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            assert!((x - f64::from(u8::from(i == j))).abs() <= 10.0 * 3.0 * EPS, "{pm:?}");
        }
    }
    // idempotent
    let again = canonicalize(&c, &s).unwrap();
    for (a, b) in again.forms.iter().zip(&c.forms) {
        assert!(a.max_abs_diff(b) <= 1e-9);
    }
    assert!((auto_mu(&c).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn scalar_canonicalization() {
    let s = domain(1, 150, 2);
    let b = build_basis(&s, &cfg(), &BasisOptions::default()).unwrap();
    let l = s.hole_loops();
    let p = periods(&s, &b.forms[0], &l).unwrap()[0];
    let scaled = HarmonicBasis { forms: vec![b.forms[0].scaled(2.5 / p)], ..b.clone() };
    let c = canonicalize(&scaled, &s).unwrap();
    assert!(c.forms[0].max_abs_diff(&scaled.forms[0].scaled(1.0 / 2.5)) <= 1e-12);
}

#[test]
fn singular_period_matrix_is_rejected() {
    let s = domain(2, 200, 5);
    let b = build_basis(&s, &cfg(), &BasisOptions::default()).unwrap();
    let dup = HarmonicBasis { forms: vec![b.forms[0].clone(), b.forms[0].scaled(3.0)], ..b };
    assert!(matches!(canonicalize(&dup, &s), Err(BasisError::SingularPeriods { .. })));
}

/// On a planar domain a closed walk differs from its hole-loop combination
/// by a 2-chain whose face weights are the walk's winding numbers around
/// the faces, so each canonical period misses its integer by at most the
/// weighted curl of the form.
#[test]
fn canonical_integrality_on_closed_walks() {
    use crate::oracle::winding_turns;
    use crate::surface::d1;
    let d = grid_domain(&DomainSpec::scattered(3, 300, 6)).unwrap();
    let s = &d.surface;
    let c = canonicalize(&build_basis(s, &cfg(), &BasisOptions::default()).unwrap(), s).unwrap();
    let curls: Vec<_> = c.forms.iter().map(|f| d1(s, f)).collect();
    let centroids: Vec<[f64; 2]> = s
        .faces()
        .iter()
        .map(|f| {
            let p: Vec<[f64; 2]> = f.iter().map(|&n| s.position2(n).unwrap()).collect();
            [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let cyc = waypoint_cycle(s, 0, 3, &mut rng).unwrap();
        let pts: Vec<[f64; 2]> = cyc[..cyc.len() - 1].iter().map(|&n| s.position2(n).unwrap()).collect();
        let weights: Vec<f64> = centroids.iter().map(|&p| winding_turns(&pts, p).unwrap().round()).collect();
        let holes: Vec<f64> = d.truth.anchors.iter().map(|&a| winding_turns(&pts, a).unwrap().round()).collect();
        let walk = s.walk(&cyc).unwrap();
        for (i, f) in c.forms.iter().enumerate() {
            let v = f.sum_along(&walk);
            let bound: f64 = weights.iter().zip(curls[i].values()).map(|(w, x)| (w * x).abs()).sum();
            let slack = 1e-12 * cyc.len() as f64;
            assert!((v - holes[i]).abs() <= bound + slack, "{v} vs {} (bound {bound:e})", holes[i]);
            assert!(bound < 0.05);
        }
    }
}

#[test]
fn auto_mu_is_half_the_smallest_period() {
    let b = HarmonicBasis {
        forms: vec![],
        eps: EPS,
        seeds: vec![],
        canonical: false,
        period_matrix: Some(vec![vec![0.8, -0.3], vec![1e-12, 2.0]]),
        surface_hash: String::new(),
    };
    assert_eq!(auto_mu(&b), Some(0.15));
    assert_eq!(auto_mu(&HarmonicBasis { period_matrix: None, ..b }), None);
}

#[test]
fn basis_file_round_trip() {
    let s = domain(2, 150, 7);
    let b = canonicalize(&build_basis(&s, &cfg(), &BasisOptions::default()).unwrap(), &s).unwrap();
    let text = b.to_json(&s).unwrap();
    let back = HarmonicBasis::from_json(&s, &text).unwrap();
    assert_eq!(back.to_json(&s).unwrap(), text);
    assert_eq!(back.len(), 2);
    for (x, y) in back.forms.iter().zip(&b.forms) {
        assert!(x.max_abs_diff(y) == 0.0);
    }
    let other = domain(2, 150, 8);
    assert!(matches!(HarmonicBasis::from_json(&other, &text), Err(BasisError::WrongSurface { .. }) | Err(BasisError::Surface(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rank_is_scale_invariant(seed in 0u64..1000, c in prop::sample::select(vec![-1e3, -2.0, 1e-3, 0.5, 7.0])) {
        let s = torus(5, 4, seed).unwrap();
        let forms: Vec<Cochain1> = (0..3).map(|j| form(&s, seed * 3 + j)).collect();
        let probes: Vec<usize> = (0..8).collect();
        let refs: Vec<&Cochain1> = forms.iter().collect();
        let r = independence_rank(&refs, &probes, DEFAULT_RANK_TOL);
        let scaled = forms[1].scaled(c);
        let refs2 = vec![&forms[0], &scaled, &forms[2]];
        prop_assert_eq!(independence_rank(&refs2, &probes, DEFAULT_RANK_TOL), r);
    }

    #[test]
    fn periods_are_linear(seed in 0u64..1000, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let s = domain(2, 120, seed % 5);
        let loops = s.hole_loops();
        let (w1, w2) = (form(&s, seed), form(&s, seed + 1));
        let combo = Cochain1::combination(&[w1.clone(), w2.clone()], &[a, b]);
        let p = periods(&s, &combo, &loops).unwrap();
        let (p1, p2) = (periods(&s, &w1, &loops).unwrap(), periods(&s, &w2, &loops).unwrap());
        for i in 0..loops.len() {
            let expect = a * p1[i] + b * p2[i];
            let scale = loops[i].len() as f64 * (a.abs() + b.abs() + 1.0);
            prop_assert!((p[i] - expect).abs() <= 8.0 * f64::EPSILON * scale);
        }
    }
}
