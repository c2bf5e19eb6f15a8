use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Domain, NetgenError, Result};
use crate::classify::Trajectory;
use crate::oracle::winding_geometric;
use crate::surface::CombinatorialSurface;

/// Which side of each obstacle a path passes, as winding numbers of the
/// path closed by a fixed return route.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideSignature {
    pub windings: Vec<i64>,
    /// False when the path repeats a node.
    pub simple: bool,
}

/// The return route is the deterministic shortest path from the target back
/// to the source, so paths with equal endpoints get comparable signatures.
pub fn side_signature(s: &CombinatorialSurface, path: &[usize], anchors: &[[f64; 2]]) -> Result<SideSignature> {
    let (Some(&src), Some(&dst)) = (path.first(), path.last()) else {
        return Err(NetgenError::InvalidSpec("empty path".into()));
    };
    let mut closed = path.to_vec();
    if src != dst {
        closed.extend_from_slice(&s.shortest_path(dst, src)?[1..]);
    } else if closed.len() == 1 {
        closed.push(src);
    }
    let windings = winding_geometric(&closed, s, anchors)?;
    let mut seen = path.to_vec();
    seen.sort_unstable();
    let simple = seen.windows(2).all(|w| w[0] != w[1]);
    Ok(SideSignature { windings, simple })
}

/// Shortest paths chained through `n_waypoints` uniformly drawn nodes.
pub fn waypoint_path<R: Rng>(
    s: &CombinatorialSurface,
    src: usize,
    dst: usize,
    n_waypoints: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut stops = vec![src];
    stops.extend((0..n_waypoints).map(|_| rng.gen_range(0..s.n_nodes())));
    stops.push(dst);
    chain(s, &stops)
}

/// A closed walk (last node repeats the first) through random waypoints.
pub fn waypoint_cycle<R: Rng>(s: &CombinatorialSurface, start: usize, n_waypoints: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut path = waypoint_path(s, start, start, n_waypoints.max(1), rng)?;
    if path.len() == 1 {
        path.push(start);
    }
    Ok(path)
}

fn chain(s: &CombinatorialSurface, stops: &[usize]) -> Result<Vec<usize>> {
    let mut nodes = vec![stops[0]];
    for w in stops.windows(2) {
        nodes.extend_from_slice(&s.shortest_path(w[0], w[1])?[1..]);
    }
    Ok(nodes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassedPath {
    pub trajectory: Trajectory,
    /// Index of the side pattern the path was generated from.
    pub class: usize,
}

/// Paths from the domain's left edge to its right edge that pass each hole
/// (ordered by x) above (`true`) or below (`false`) as the pattern says.
/// Meant for domains with holes in a row.
pub fn classed_paths(d: &Domain, patterns: &[Vec<bool>], per_class: usize, seed: u64) -> Result<Vec<ClassedPath>> {
    let s = &d.surface;
    let pts: Vec<[f64; 2]> =
        (0..s.n_nodes()).map(|n| s.position2(n).ok_or_else(|| NetgenError::Geometry("no coordinates".into()))).collect::<Result<_>>()?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let ymid = 0.5 * (y0 + y1);
    let src = s.nearest_node(&[x0, ymid]).expect("coords");
    let dst = s.nearest_node(&[x1, ymid]).expect("coords");
    let mut anchors = d.truth.anchors.clone();
    anchors.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let k = anchors.len().max(1);
    let mut out = Vec::with_capacity(patterns.len() * per_class);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (class, pattern) in patterns.iter().enumerate() {
        if pattern.len() != anchors.len() {
            return Err(NetgenError::InvalidSpec(format!(
                "pattern {class} has {} sides for {} holes",
                pattern.len(),
                anchors.len()
            )));
        }
        let pools: Vec<Vec<usize>> = anchors
            .iter()
            .zip(pattern)
            .map(|(a, &above)| {
                (0..s.n_nodes())
                    .filter(|&n| {
                        let p = pts[n];
                        (p[0] - a[0]).abs() <= 0.1 * w / k as f64
                            && if above { p[1] >= a[1] + 0.25 * h } else { p[1] <= a[1] - 0.25 * h }
                    })
                    .collect()
            })
            .collect();
        if let Some(i) = pools.iter().position(Vec::is_empty) {
            return Err(NetgenError::NoCandidates(format!("hole {i} in pattern {class}")));
        }
        for i in 0..per_class {
            let mut stops = vec![src];
            stops.extend(pools.iter().map(|p| p[rng.gen_range(0..p.len())]));
            stops.push(dst);
            let nodes = chain(s, &stops)?;
            let trajectory = Trajectory::new(format!("c{class}-{i}"), nodes);
            out.push(ClassedPath { trajectory, class });
        }
    }
    Ok(out)
}
