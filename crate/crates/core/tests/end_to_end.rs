use hodgetrack::basis::{auto_mu, build_basis, canonicalize, BasisOptions};
use hodgetrack::classify::{bucketize, same_class, winding_vector, ClassifierConfig, Trajectory};
use hodgetrack::hodge::{decompose, random_one_form, GossipConfig};
use hodgetrack::netgen::{grid_domain, side_signature, torus, waypoint_path, DomainSpec};
use hodgetrack::oracle::{direct_solve, tree_cotree_signature, winding_geometric};
use hodgetrack::surface::io::{read_mesh, write_mesh};
use hodgetrack::surface::Cochain1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn mesh_text_survives_a_round_trip() {
    let d = grid_domain(&DomainSpec::scattered(2, 250, 3)).unwrap();
    let text = write_mesh(&d.surface);
    let back = read_mesh(&text).unwrap();
    assert_eq!(back.hash(), d.surface.hash());
    assert_eq!(write_mesh(&back), text);
    assert_eq!(back.betti1(), 2);
}

#[test]
fn closed_surface_decomposition_matches_direct() {
    let s = torus(6, 7, 1).unwrap();
    let w = random_one_form(&s, 4);
    let g = decompose(&s, &w, &GossipConfig::with_eps(1e-9)).unwrap();
    let d = direct_solve(&s, &w).unwrap();
    assert!(g.h.max_abs_diff(&d.h) < 1e-6);
    let sum: Vec<f64> = (0..s.n_edges()).map(|e| g.df[e] + g.dg[e] + g.h[e]).collect();
    assert!(Cochain1::from_values(sum).max_abs_diff(&w) < 1e-9);
}

#[test]
fn classes_follow_the_holes() {
    let d = grid_domain(&DomainSpec::scattered(3, 500, 8)).unwrap();
    let s = &d.surface;
    let raw = build_basis(s, &GossipConfig::with_eps(1e-6), &BasisOptions::default()).unwrap();
    let b = canonicalize(&raw, s).unwrap();
    let cfg = ClassifierConfig { mu: auto_mu(&b).unwrap(), quantize: false };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trajs: Vec<Trajectory> = (0..12)
        .map(|i| Trajectory::new(format!("t{i:02}"), waypoint_path(s, 0, s.n_nodes() - 1, 2, &mut rng).unwrap()))
        .collect();
    for a in &trajs {
        for c in &trajs {
            let mut cycle = a.nodes.clone();
            cycle.extend(c.nodes.iter().rev().skip(1));
            let oracle = tree_cotree_signature(&cycle, s).unwrap().is_zero();
            let geo = winding_geometric(&cycle, s, &d.truth.anchors).unwrap();
            assert_eq!(same_class(a, c, &b, s, &cfg).unwrap(), oracle);
            assert_eq!(oracle, geo.iter().all(|&x| x == 0));
            let wv = winding_vector(&Trajectory::new("loop", cycle), &b, s).unwrap();
            assert!(wv.reliable && wv.residual < 0.1);
        }
    }
    let report = bucketize(&trajs, &b, s, &cfg).unwrap();
    let distinct: std::collections::BTreeSet<Vec<i64>> =
        trajs.iter().map(|t| side_signature(s, &t.nodes, &d.truth.anchors).unwrap().windings).collect();
    assert_eq!(report.buckets.len(), distinct.len());
}
