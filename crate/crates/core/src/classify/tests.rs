use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::basis::{build_basis, canonicalize, BasisOptions};
use crate::hodge::GossipConfig;
use crate::netgen::{grid_domain, waypoint_path, Domain, DomainSpec};
use crate::surface::Cochain1;

struct Fixture {
    d: Domain,
    raw: HarmonicBasis,
    canon: HarmonicBasis,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let d = grid_domain(&DomainSpec::holes_in_row(2, 300, 3)).unwrap();
        let raw = build_basis(&d.surface, &GossipConfig::with_eps(1e-8), &BasisOptions::default()).unwrap();
        let canon = canonicalize(&raw, &d.surface).unwrap();
        Fixture { d, raw, canon }
    })
}

fn hop(s: &CombinatorialSurface) -> (usize, usize) {
    let [a, b] = s.edges()[0];
    (a, b)
}

#[test]
fn path_integral_is_antisymmetric() {
    let f = fixture();
    let s = &f.d.surface;
    let (a, b) = hop(s);
    let mut w = Cochain1::zeros(s.n_edges());
    w[0] = 0.5;
    assert_eq!(path_integral(&w, &Trajectory::new("x", vec![a, b]), s).unwrap(), 0.5);
    assert_eq!(path_integral(&w, &Trajectory::new("x", vec![b, a]), s).unwrap(), -0.5);
    assert_eq!(path_integral(&w, &Trajectory::new("x", vec![a, b, a]), s).unwrap(), 0.0);
}

#[test]
fn invalid_trajectories() {
    let s = &fixture().d.surface;
    let b = &fixture().raw;
    assert!(matches!(t_tuple(&Trajectory::new("p", vec![3]), b, s), Err(ClassifyError::TooShort { .. })));
    let far = (1..s.n_nodes()).find(|&v| !s.has_edge(0, v)).unwrap();
    assert!(matches!(
        t_tuple(&Trajectory::new("q", vec![0, far]), b, s),
        Err(ClassifyError::InvalidHop { u: 0, .. })
    ));
}

#[test]
fn back_and_forth_leaves_the_tuple_alone() {
    let f = fixture();
    let s = &f.d.surface;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = waypoint_path(s, 0, 40, 2, &mut rng).unwrap();
    let t = t_tuple(&Trajectory::new("a", p.clone()), &f.raw, s).unwrap();
    let mut q = p.clone();
    let last = *q.last().unwrap();
    let nb = s.star(last)[0].neighbor;
    q.extend([nb, last]);
    assert_eq!(t_tuple(&Trajectory::new("b", q), &f.raw, s).unwrap(), t);
}

#[test]
fn sigma_contract() {
    let f = fixture();
    let s = &f.d.surface;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = Trajectory::new("p", waypoint_path(s, 0, 40, 2, &mut rng).unwrap());
    assert_eq!(sigma(&p, &p, &f.raw, s).unwrap(), 0.0);
    let q = Trajectory::new("q", waypoint_path(s, 0, 41, 2, &mut rng).unwrap());
    assert!(matches!(sigma(&p, &q, &f.raw, s), Err(ClassifyError::EndpointMismatch { .. })));
    let cfg = ClassifierConfig { mu: 1e-9, quantize: false };
    assert!(same_class(&p, &p, &f.raw, s, &cfg).unwrap());
    assert!(matches!(
        same_class(&p, &p, &f.raw, s, &ClassifierConfig { mu: 0.0, quantize: false }),
        Err(ClassifyError::InvalidMu(_))
    ));
}

#[test]
fn opposite_sides_of_a_hole_differ_by_one() {
    let f = fixture();
    let s = &f.d.surface;
    let paths = crate::netgen::classed_paths(&f.d, &[vec![true, true], vec![false, true]], 1, 3).unwrap();
    let (a, b) = (&paths[0].trajectory, &paths[1].trajectory);
    let sg = sigma(a, b, &f.canon, s).unwrap();
    assert!((sg - 1.0).abs() < 1e-4, "{sg}");
}

#[test]
fn winding_vectors() {
    let f = fixture();
    let s = &f.d.surface;
    let (a, b) = hop(s);
    let w = winding_vector(&Trajectory::new("t", vec![a, b, a]), &f.canon, s).unwrap();
    assert_eq!(w.vector, vec![0, 0]);
    assert!(w.residual < 1e-12 && w.reliable);
    for (i, l) in s.hole_loops().iter().enumerate() {
        let mut nodes = Vec::new();
        for _ in 0..3 {
            nodes.extend_from_slice(l);
        }
        nodes.push(l[0]);
        let w = winding_vector(&Trajectory::new("l", nodes), &f.canon, s).unwrap();
        let mut e = vec![0, 0];
        e[i] = 3;
        assert_eq!(w.vector, e);
        assert!(w.residual < 1e-6);
    }
    assert!(matches!(
        winding_vector(&Trajectory::new("o", vec![a, b]), &f.canon, s),
        Err(ClassifyError::NotClosed { .. })
    ));
    assert!(matches!(
        winding_vector(&Trajectory::new("r", vec![a, b, a]), &f.raw, s),
        Err(ClassifyError::NotCanonical)
    ));
}

fn four_classes() -> Vec<Trajectory> {
    let f = fixture();
    let t = true;
    let pats = vec![vec![t, t], vec![!t, !t], vec![t, !t], vec![!t, t]];
    crate::netgen::classed_paths(&f.d, &pats, 4, 9).unwrap().into_iter().map(|p| p.trajectory).collect()
}

#[test]
fn bucketize_modes_agree() {
    let f = fixture();
    let s = &f.d.surface;
    let trajs = four_classes();
    let q = bucketize(&trajs, &f.canon, s, &ClassifierConfig { mu: 0.5, quantize: true }).unwrap();
    assert_eq!(q.summary, BucketSummary { n_buckets: 4, max_bucket: 4, n_singletons: 0 });
    assert!(q.near_threshold.is_empty());
    let mu = crate::basis::auto_mu(&f.raw).unwrap();
    let u = bucketize(&trajs, &f.raw, s, &ClassifierConfig { mu, quantize: false }).unwrap();
    let (qa, ua) = (q.assignment(), u.assignment());
    for a in &trajs {
        for b in &trajs {
            assert_eq!(qa[&a.id] == qa[&b.id], ua[&a.id] == ua[&b.id]);
        }
    }
    assert!(q.to_csv().lines().count() == trajs.len() + 1);
}

#[test]
fn bucketize_edge_cases() {
    let f = fixture();
    let s = &f.d.surface;
    let r = bucketize(&[], &f.raw, s, &ClassifierConfig::default()).unwrap();
    assert_eq!(r.summary, BucketSummary::default());
    let t = four_classes()[0].clone();
    let dup: Vec<Trajectory> = (0..4).map(|i| Trajectory::new(format!("d{i}"), t.nodes.clone())).collect();
    for mu in [1e-12, 1.0] {
        let r = bucketize(&dup, &f.raw, s, &ClassifierConfig { mu, quantize: false }).unwrap();
        assert_eq!(r.summary.n_buckets, 1);
    }
    // different endpoints never share a bucket
    let (a, b) = hop(s);
    let mixed = vec![Trajectory::new("x", vec![a, b]), Trajectory::new("y", vec![b, a])];
    let r = bucketize(&mixed, &f.raw, s, &ClassifierConfig { mu: 100.0, quantize: false }).unwrap();
    assert_eq!(r.summary.n_singletons, 2);
}

#[test]
fn near_threshold_pairs_are_flagged() {
    let f = fixture();
    let s = &f.d.surface;
    let trajs = four_classes();
    let tt: Vec<TTuple> = trajs.iter().map(|t| t_tuple(t, &f.raw, s).unwrap()).collect();
    let d = sigma_tuples(&tt[0], &tt[4]).unwrap();
    let r = bucketize(&trajs[..5], &f.raw, s, &ClassifierConfig { mu: d, quantize: false }).unwrap();
    assert!(r.near_threshold.contains(&(trajs[0].id.clone(), trajs[4].id.clone())));
}

#[test]
fn snapping() {
    let s = &fixture().d.surface;
    let (a, b) = hop(s);
    let pa = s.position(a).unwrap();
    let pb = s.position(b).unwrap();
    let t = snap_trace("s", &[pa[..2].to_vec(), pb[..2].to_vec()], s, None).unwrap();
    assert_eq!(t.nodes, vec![a, b]);
    let far = (0..s.n_nodes()).max_by_key(|&v| s.bfs_distances(a)[v]).unwrap();
    let pf = s.position(far).unwrap();
    let t = snap_trace("f", &[pa[..2].to_vec(), pf[..2].to_vec()], s, None).unwrap();
    assert_eq!(t.nodes.len() - 1, s.bfs_distances(a)[far]);
    assert!(matches!(snap_trace("one", &[pa[..2].to_vec()], s, None), Err(ClassifyError::TooShort { .. })));
    assert!(matches!(snap_trace("none", &[], s, None), Err(ClassifyError::TooShort { .. })));
    // far-away samples still snap
    assert!(snap_trace("w", &[vec![-100.0, -100.0], pf[..2].to_vec()], s, None).is_ok());
}

#[test]
fn trajectory_file_round_trip() {
    let s = &fixture().d.surface;
    let trajs = four_classes();
    let text = write_trajectories(&trajs);
    assert_eq!(read_trajectories(&text, s).unwrap(), trajs);
    let (a, b) = hop(s);
    let pa = s.position(a).unwrap();
    let pb = s.position(b).unwrap();
    let mixed = format!(
        "# comment\n\n{{\"id\":\"n\",\"nodes\":[{a},{b}]}}\n{{\"id\":\"p\",\"points\":[[{},{}],[{},{}]]}}\n",
        pa[0], pa[1], pb[0], pb[1]
    );
    let got = read_trajectories(&mixed, s).unwrap();
    assert_eq!(got[0], got[1].clone().renamed("n"));
    assert!(matches!(read_trajectories("{oops", s), Err(ClassifyError::Parse { line: 1, .. })));
}

trait Renamed {
    fn renamed(self, id: &str) -> Self;
}

impl Renamed for Trajectory {
    fn renamed(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reversal_and_concatenation(seed in 0u64..10_000) {
        let f = fixture();
        let s = &f.d.surface;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = s.n_nodes();
        let (x, y, z) = (seed as usize % n, (seed as usize * 7 + 3) % n, (seed as usize * 13 + 5) % n);
        prop_assume!(x != y && y != z);
        let pa = waypoint_path(s, x, y, 1, &mut rng).unwrap();
        let pb = waypoint_path(s, y, z, 1, &mut rng).unwrap();
        let ta = t_tuple(&Trajectory::new("a", pa.clone()), &f.raw, s).unwrap();
        let mut rev = pa.clone();
        rev.reverse();
        let tr = t_tuple(&Trajectory::new("r", rev), &f.raw, s).unwrap();
        for (u, v) in ta.h.iter().zip(&tr.h) {
            prop_assert_eq!(*u, -*v);
        }
        let tb = t_tuple(&Trajectory::new("b", pb.clone()), &f.raw, s).unwrap();
        let mut ab = pa.clone();
        ab.extend_from_slice(&pb[1..]);
        let tab = t_tuple(&Trajectory::new("ab", ab), &f.raw, s).unwrap();
        for i in 0..tab.h.len() {
            let tol = 4.0 * f64::EPSILON * (pa.len() + pb.len()) as f64;
            prop_assert!((tab.h[i] - (ta.h[i] + tb.h[i])).abs() <= tol);
        }
    }

    #[test]
    fn same_class_is_reflexive_and_symmetric(i in 0usize..16, j in 0usize..16, mu in 1e-6f64..2.0) {
        let f = fixture();
        let s = &f.d.surface;
        let trajs = four_classes();
        let cfg = ClassifierConfig { mu, quantize: false };
        prop_assert!(same_class(&trajs[i], &trajs[i], &f.raw, s, &cfg).unwrap());
        prop_assert_eq!(
            same_class(&trajs[i], &trajs[j], &f.raw, s, &cfg).unwrap(),
            same_class(&trajs[j], &trajs[i], &f.raw, s, &cfg).unwrap()
        );
    }
}
