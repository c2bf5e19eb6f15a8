use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::surface::io::{read_mesh, write_mesh};

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> HoleShape {
    HoleShape::Rect(Rect { x0, y0, x1, y1 })
}

fn plain(width: f64, height: f64, holes: Vec<HoleShape>, n: usize) -> DomainSpec {
    DomainSpec { width, height, holes, jitter: 0.25, target_nodes: n, seed: 1 }
}

#[test]
fn holeless_grid_is_a_disk() {
    let d = grid_domain(&plain(5.0, 5.0, vec![], 25)).unwrap();
    assert_eq!(d.surface.euler_characteristic(), 1);
    assert_eq!(d.truth.hole_count, 0);
    assert!(d.surface.hole_loops().is_empty());
}

#[test]
fn node_counts_and_degrees() {
    for (k, n) in [(3, 85), (1, 500), (3, 3000), (6, 3000)] {
        let d = grid_domain(&DomainSpec::holes_in_row(k, n, 2)).unwrap();
        let s = &d.surface;
        let got = s.n_nodes() as f64;
        assert!((got - n as f64).abs() <= 0.1 * n as f64, "{k} holes, target {n}: {got}");
        assert!((5.0..=7.0).contains(&s.average_degree()) || n < 100, "{}", s.average_degree());
        assert_eq!(d.truth.hole_count, k);
        assert_eq!(s.betti1(), k);
        assert_eq!(d.truth.hole_loops, s.hole_loops());
    }
}

#[test]
fn scattered_domains_have_the_requested_holes() {
    for k in [1, 2, 3, 5, 7] {
        let d = grid_domain(&DomainSpec::scattered(k, 600, k as u64)).unwrap();
        assert_eq!(d.surface.hole_loops().len(), k);
        assert_eq!(d.truth.anchors.len(), k);
    }
}

#[test]
fn polygon_holes() {
    let tri = HoleShape::Polygon { points: vec![[4.0, 4.0], [12.0, 4.0], [8.0, 11.0]] };
    let d = grid_domain(&plain(16.0, 16.0, vec![tri], 256)).unwrap();
    assert_eq!(d.truth.hole_count, 1);
    let a = d.truth.anchors[0];
    assert!(a[0] > 4.0 && a[0] < 12.0 && a[1] > 4.0 && a[1] < 11.0);
}

#[test]
fn spec_errors() {
    let bad = |spec: DomainSpec| grid_domain(&spec).unwrap_err();
    assert!(matches!(bad(plain(10.0, 10.0, vec![], 19)), NetgenError::InvalidSpec(_)));
    assert!(matches!(bad(DomainSpec { jitter: 0.5, ..plain(10.0, 10.0, vec![], 100) }), NetgenError::InvalidSpec(_)));
    assert!(matches!(
        bad(plain(20.0, 20.0, vec![rect(0.0, 5.0, 6.0, 10.0)], 400)),
        NetgenError::HoleTouchesBorder { index: 0 }
    ));
    assert!(matches!(
        bad(plain(20.0, 20.0, vec![rect(5.0, 5.0, 9.0, 9.0), rect(8.0, 8.0, 12.0, 12.0)], 400)),
        NetgenError::HolesTooClose { .. }
    ));
    assert!(matches!(
        bad(plain(20.0, 20.0, vec![rect(10.1, 10.1, 10.2, 10.2)], 400)),
        NetgenError::HoleTooSmall { index: 0 }
    ));
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    let spec = DomainSpec::scattered(2, 300, 5);
    let a = grid_domain(&spec).unwrap();
    let b = grid_domain(&spec).unwrap();
    let text = write_mesh(&a.surface);
    assert_eq!(text, write_mesh(&b.surface));
    let back = read_mesh(&text).unwrap();
    assert_eq!(write_mesh(&back), text);
    assert_eq!(back.hash(), a.surface.hash());
    let other = grid_domain(&DomainSpec { seed: 6, ..spec }).unwrap();
    assert_ne!(write_mesh(&other.surface), text);
}

#[test]
fn torus_topology() {
    let t = torus(6, 4, 0).unwrap();
    assert!(t.is_closed());
    assert_eq!(t.genus(), 1);
    assert_eq!(t.coord_dim(), 3);
    assert!(matches!(torus(2, 5, 0), Err(NetgenError::InvalidSpec(_))));
}

#[test]
fn default_museum() {
    let m = museum_domain(&MuseumSpec::default()).unwrap();
    let s = &m.surface;
    assert_eq!(m.rooms.n_rooms(), 15);
    assert_eq!(m.truth.hole_count, 5);
    assert_eq!(s.betti1(), 5);
    assert_eq!(m.truth.anchors.len(), 5);
    assert!((s.n_nodes() as f64 - 1500.0).abs() <= 150.0);
    assert!((5.0..=7.0).contains(&s.average_degree()));
    assert_ne!(m.entrance, m.exit);
    assert!(m.rooms.members.iter().all(|r| !r.is_empty()));
    assert!(m.rooms.members[m.entrance_room].contains(&m.entrance));
    assert!(m.rooms.members[m.exit_room].contains(&m.exit));
    // room graph connected
    let mut seen = [false; 15];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(r) = stack.pop() {
        for &o in &m.rooms.adjacency[r] {
            if !seen[o] {
                seen[o] = true;
                stack.push(o);
            }
        }
    }
    assert!(seen.iter().all(|&x| x));
    // one door per shared side of a 5 x 3 room grid
    assert_eq!(m.rooms.n_doors(), 4 * 3 + 5 * 2);
}

#[test]
fn two_room_museum() {
    let spec = MuseumSpec {
        rooms_x: 2,
        rooms_y: 1,
        pillars: vec![],
        obstacles: vec![Rect { x0: 3.0, y0: 3.0, x1: 7.0, y1: 7.0 }],
        target_nodes: 400,
        ..MuseumSpec::default()
    };
    let m = museum_domain(&spec).unwrap();
    assert_eq!(m.truth.hole_count, 1);
    assert_eq!(m.rooms.adjacency, vec![vec![1], vec![0]]);
    let trajs = museum_trajectories(&m, 10, 3, RoomWalk::NoBacktrack).unwrap();
    for t in &trajs {
        t.validate(&m.surface).unwrap();
        assert_eq!((t.source(), t.target()), (Some(m.entrance), Some(m.exit)));
    }
}

#[test]
fn museum_spec_errors() {
    let bad = MuseumSpec { pillars: vec![[0, 1]], ..MuseumSpec::default() };
    assert!(matches!(museum_domain(&bad), Err(NetgenError::InvalidSpec(_))));
    let same = MuseumSpec { exit_room: Some([0, 0]), ..MuseumSpec::default() };
    assert!(matches!(museum_domain(&same), Err(NetgenError::InvalidSpec(_))));
    let one = MuseumSpec { rooms_x: 1, rooms_y: 1, pillars: vec![], ..MuseumSpec::default() };
    assert!(matches!(museum_domain(&one), Err(NetgenError::InvalidSpec(_))));
}

#[test]
fn multifloor_genus() {
    // floors are disks with P pillar holes joined by L - 1 sets of tubes:
    // genus (L - 1)(ladders - 1), L (P + 1) boundary loops
    for (levels, ladders) in [(2, 2), (3, 2), (2, 3)] {
        let spec = MuseumSpec { levels, ladders, target_nodes: 700, ..MuseumSpec::default() };
        let m = museum_domain(&spec).unwrap();
        let s = &m.surface;
        let genus = (levels - 1) * (ladders - 1);
        let loops = levels * 6;
        assert_eq!(s.genus(), genus, "{levels} levels, {ladders} ladders");
        assert_eq!(s.boundary_loops().len(), loops);
        assert_eq!(s.betti1(), 2 * genus + loops - 1);
        assert_eq!(m.truth.hole_count, s.betti1());
    }
}

#[test]
fn museum_trajectories_are_valid_and_seeded() {
    let m = museum_domain(&MuseumSpec { target_nodes: 800, ..MuseumSpec::default() }).unwrap();
    let a = museum_trajectories(&m, 30, 7, RoomWalk::NoBacktrack).unwrap();
    assert_eq!(a, museum_trajectories(&m, 30, 7, RoomWalk::NoBacktrack).unwrap());
    assert_ne!(a, museum_trajectories(&m, 30, 8, RoomWalk::NoBacktrack).unwrap());
    for t in a.iter().chain(&museum_trajectories(&m, 30, 7, RoomWalk::Simple).unwrap()) {
        t.validate(&m.surface).unwrap();
        assert_eq!(t.source(), Some(m.entrance));
        assert_eq!(t.target(), Some(m.exit));
    }
    // trajectory t does not depend on how many others are drawn
    assert_eq!(museum_trajectories(&m, 5, 7, RoomWalk::NoBacktrack).unwrap()[..], a[..5]);
}

#[test]
fn side_signatures_tell_sides_apart() {
    let d = grid_domain(&DomainSpec::holes_in_row(1, 400, 3)).unwrap();
    let paths = classed_paths(&d, &[vec![true], vec![false]], 3, 1).unwrap();
    let sigs: Vec<SideSignature> = paths
        .iter()
        .map(|p| side_signature(&d.surface, &p.trajectory.nodes, &d.truth.anchors).unwrap())
        .collect();
    assert_eq!(sigs[0].windings, sigs[1].windings);
    assert_eq!(sigs[0].windings, sigs[2].windings);
    assert_ne!(sigs[0].windings, sigs[3].windings);
    assert_eq!((sigs[0].windings[0] - sigs[3].windings[0]).abs(), 1);
}

#[test]
fn classed_paths_form_four_groups_of_five() {
    let d = grid_domain(&DomainSpec::holes_in_row(3, 3000, 1)).unwrap();
    let t = true;
    let f = false;
    let patterns = vec![vec![t, t, t], vec![f, f, f], vec![t, f, t], vec![f, t, f]];
    let paths = classed_paths(&d, &patterns, 5, 2).unwrap();
    assert_eq!(paths.len(), 20);
    let mut groups: BTreeMap<Vec<i64>, BTreeSet<usize>> = BTreeMap::new();
    for p in &paths {
        p.trajectory.validate(&d.surface).unwrap();
        let sig = side_signature(&d.surface, &p.trajectory.nodes, &d.truth.anchors).unwrap();
        groups.entry(sig.windings).or_default().insert(p.class);
    }
    assert_eq!(groups.len(), 4);
    assert!(groups.values().all(|c| c.len() == 1));
}

#[test]
fn waypoint_walks() {
    let d = grid_domain(&DomainSpec::scattered(2, 200, 4)).unwrap();
    let s = &d.surface;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = waypoint_path(s, 0, 17, 3, &mut rng).unwrap();
    assert_eq!((p[0], *p.last().unwrap()), (0, 17));
    s.walk(&p).unwrap();
    let c = waypoint_cycle(s, 5, 2, &mut rng).unwrap();
    assert_eq!(c.first(), c.last());
    assert!(c.len() >= 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generated_domains_are_valid(k in 0usize..5, n in 60usize..700, seed in 0u64..100) {
        let d = grid_domain(&DomainSpec::scattered(k, n, seed)).unwrap();
        let s = &d.surface;
        prop_assert_eq!(s.betti1(), k);
        prop_assert_eq!(d.truth.hole_count, k);
        prop_assert!((s.n_nodes() as f64 - n as f64).abs() <= 0.1 * n as f64);
        prop_assert!(s.bfs_distances(0).iter().all(|&x| x != usize::MAX));
    }
}
