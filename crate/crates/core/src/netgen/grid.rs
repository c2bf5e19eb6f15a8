use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NetgenError, Result};
use crate::oracle::winding_turns;
use crate::surface::{build_surface, CombinatorialSurface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum HoleShape {
    Rect(Rect),
    Polygon { points: Vec<[f64; 2]> },
}

impl HoleShape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            HoleShape::Rect(r) => r.contains(x, y),
            HoleShape::Polygon { points } => {
                winding_turns(points, [x, y]).is_some_and(|t| t.round() != 0.0)
            }
        }
    }
}

fn default_jitter() -> f64 {
    0.25
}

/// A jittered grid over `[0, width] x [0, height]` with holes cut out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub holes: Vec<HoleShape>,
    /// Node displacement bound in grid-spacing units, in `[0, 0.5)`.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
    pub target_nodes: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DomainSpec {
    /// `k` rectangular holes on a near-square grid of cells, one per cell.
    pub fn scattered(k: usize, target_nodes: usize, seed: u64) -> Self {
        let side = (target_nodes as f64).sqrt();
        let cols = (k as f64).sqrt().ceil().max(1.0) as usize;
        let rows = k.div_ceil(cols).max(1);
        let (cw, ch) = (side / cols as f64, side / rows as f64);
        let holes = (0..k)
            .map(|i| {
                let (c, r) = ((i % cols) as f64, (i / cols) as f64);
                HoleShape::Rect(Rect {
                    x0: (c + 0.3) * cw,
                    y0: (r + 0.3) * ch,
                    x1: (c + 0.7) * cw,
                    y1: (r + 0.7) * ch,
                })
            })
            .collect();
        DomainSpec { width: side, height: side, holes, jitter: default_jitter(), target_nodes, seed }
    }

    /// `k` holes side by side across a domain twice as wide as high.
    pub fn holes_in_row(k: usize, target_nodes: usize, seed: u64) -> Self {
        let height = (target_nodes as f64 / 2.0).sqrt();
        let width = 2.0 * height;
        let cw = width / k.max(1) as f64;
        let holes = (0..k)
            .map(|i| {
                HoleShape::Rect(Rect {
                    x0: (i as f64 + 0.3) * cw,
                    y0: 0.3 * height,
                    x1: (i as f64 + 0.7) * cw,
                    y1: 0.7 * height,
                })
            })
            .collect();
        DomainSpec { width, height, holes, jitter: default_jitter(), target_nodes, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.target_nodes < 20 {
            return Err(NetgenError::InvalidSpec(format!(
                "target_nodes must be at least 20, got {}",
                self.target_nodes
            )));
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(NetgenError::InvalidSpec("width and height must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(NetgenError::InvalidSpec(format!("jitter {} not in [0, 0.5)", self.jitter)));
        }
        Ok(())
    }
}

/// Known topology of a generated domain, aligned with
/// [`CombinatorialSurface::hole_loops`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub hole_count: usize,
    /// One point inside each hole.
    pub anchors: Vec<[f64; 2]>,
    pub hole_loops: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub surface: CombinatorialSurface,
    pub truth: GroundTruth,
}

/// Squares of an `nx x ny` grid, indexed `j * nx + i`.
pub(super) struct SquareGrid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl SquareGrid {
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx, (j as f64 + 0.5) * self.hy)
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn n_grid_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    /// Grid nodes touched by at least one kept square.
    pub fn used_nodes(&self, removed: &[bool]) -> usize {
        let mut used = vec![false; self.n_grid_nodes()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !removed[j * self.nx + i] {
                    for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        used[self.node(i + di, j + dj)] = true;
                    }
                }
            }
        }
        used.iter().filter(|&&u| u).count()
    }
}

/// Picks the grid resolution whose node count lands closest to `target`.
pub(super) fn fit_grid<F>(width: f64, height: f64, target: usize, removed: F) -> Result<(SquareGrid, Vec<bool>)>
where
    F: Fn(&SquareGrid) -> Result<Vec<bool>>,
{
    let mut h = (width * height / target as f64).sqrt();
    let mut best: Option<(usize, SquareGrid, Vec<bool>)> = None;
    let mut tried = std::collections::HashSet::new();
    let mut last_err = None;
    for _ in 0..40 {
        let nx = ((width / h).round() as usize).max(2);
        let ny = ((height / h).round() as usize).max(2);
        if !tried.insert((nx, ny)) {
            h *= 0.99;
            continue;
        }
        let grid = SquareGrid { nx, ny, hx: width / nx as f64, hy: height / ny as f64 };
        let rm = match removed(&grid) {
            Ok(rm) => rm,
            Err(e) => {
                last_err = Some(e);
                h *= 0.97;
                continue;
            }
        };
        let count = grid.used_nodes(&rm);
        let miss = count.abs_diff(target);
        if best.as_ref().is_none_or(|b| miss < b.0) {
            best = Some((miss, grid, rm));
        }
        if miss * 100 <= target {
            break;
        }
        h *= (count as f64 / target as f64).sqrt();
    }
    match best {
        Some((miss, grid, rm)) if miss * 10 <= target => Ok((grid, rm)),
        Some((miss, _, _)) => Err(NetgenError::InvalidSpec(format!(
            "cannot reach {target} nodes within 10% (closest misses by {miss})"
        ))),
        None => Err(last_err.unwrap_or_else(|| NetgenError::InvalidSpec("no usable grid".into()))),
    }
}

/// Triangulates the kept squares with the shorter diagonal after jitter (a
/// seeded coin decides ties). Returns compacted faces and 2D positions plus
/// the grid-node to mesh-node map.
pub(super) fn triangulate(
    grid: &SquareGrid,
    removed: &[bool],
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<[usize; 3]>, Vec<[f64; 2]>, Vec<Option<usize>>) {
    let mut pos = Vec::with_capacity(grid.n_grid_nodes());
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            let mut x = i as f64 * grid.hx;
            let mut y = j as f64 * grid.hy;
            let border = i == 0 || j == 0 || i == grid.nx || j == grid.ny;
            if jitter > 0.0 && !border {
                x += rng.gen_range(-jitter..=jitter) * grid.hx;
                y += rng.gen_range(-jitter..=jitter) * grid.hy;
            }
            pos.push([x, y]);
        }
    }
    let dist = |a: usize, b: usize| {
        let (p, q) = (pos[a], pos[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    let mut faces = Vec::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if removed[j * grid.nx + i] {
                continue;
            }
            let a = grid.node(i, j);
            let b = grid.node(i + 1, j);
            let c = grid.node(i + 1, j + 1);
            let d = grid.node(i, j + 1);
            let (ac, bd) = (dist(a, c), dist(b, d));
            let use_ac = if (ac - bd).abs() <= 1e-12 * (ac + bd) { rng.gen_bool(0.5) } else { ac < bd };
            if use_ac {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    let mut map = vec![None; pos.len()];
    let mut coords = Vec::new();
    for f in &faces {
        for &n in f {
            if map[n].is_none() {
                map[n] = Some(usize::MAX);
            }
        }
    }
    for (n, slot) in map.iter_mut().enumerate() {
        if slot.is_some() {
            *slot = Some(coords.len());
            coords.push(pos[n]);
        }
    }
    let faces = faces.iter().map(|f| f.map(|n| map[n].expect("used node"))).collect();
    (faces, coords, map)
}

/// Square sets of each hole; rejects holes that cover no square, touch the
/// outer border ring, or come within one square of each other.
pub(super) fn hole_squares(grid: &SquareGrid, holes: &[HoleShape]) -> Result<(Vec<bool>, Vec<Vec<(usize, usize)>>)> {
    let mut label = vec![usize::MAX; grid.nx * grid.ny];
    let mut sets = Vec::with_capacity(holes.len());
    for (index, hole) in holes.iter().enumerate() {
        let mut set = Vec::new();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                if hole.contains(x, y) {
                    if i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.ny {
                        return Err(NetgenError::HoleTouchesBorder { index });
                    }
                    if label[j * grid.nx + i] != usize::MAX {
                        return Err(NetgenError::HolesTooClose { a: label[j * grid.nx + i], b: index });
                    }
                    label[j * grid.nx + i] = index;
                    set.push((i, j));
                }
            }
        }
        if set.is_empty() {
            return Err(NetgenError::HoleTooSmall { index });
        }
        sets.push(set);
    }
    for (index, set) in sets.iter().enumerate() {
        for &(i, j) in set {
            for nj in j - 1..=j + 1 {
                for ni in i - 1..=i + 1 {
                    let l = label[nj * grid.nx + ni];
                    if l != usize::MAX && l != index {
                        return Err(NetgenError::HolesTooClose { a: index.min(l), b: index.max(l) });
                    }
                }
            }
        }
    }
    Ok((label.iter().map(|&l| l != usize::MAX).collect(), sets))
}

/// Orders per-hole anchor points like the surface's hole loops.
pub(super) fn align_anchors(s: &CombinatorialSurface, anchors: &[[f64; 2]]) -> Result<GroundTruth> {
    let loops = s.hole_loops();
    if loops.len() != anchors.len() {
        return Err(NetgenError::InvalidSpec(format!(
            "{} holes requested but the mesh has {} hole loops",
            anchors.len(),
            loops.len()
        )));
    }
    let mut out = Vec::with_capacity(loops.len());
    for l in &loops {
        let poly: Vec<[f64; 2]> = l.iter().map(|&n| s.position2(n).expect("coords")).collect();
        let hit: Vec<&[f64; 2]> = anchors
            .iter()
            .filter(|a| winding_turns(&poly, **a).is_some_and(|t| t.round() == 1.0))
            .collect();
        match hit.as_slice() {
            [a] => out.push(**a),
            _ => return Err(NetgenError::InvalidSpec("hole loops do not separate the hole anchors".into())),
        }
    }
    Ok(GroundTruth { hole_count: loops.len(), anchors: out, hole_loops: loops })
}

pub(super) fn square_anchor(grid: &SquareGrid, set: &[(usize, usize)]) -> [f64; 2] {
    let n = set.len() as f64;
    let (mx, my) = set.iter().fold((0.0, 0.0), |(ax, ay), &(i, j)| {
        let (x, y) = grid.center(i, j);
        (ax + x / n, ay + y / n)
    });
    let &(i, j) = set
        .iter()
        .min_by(|a, b| {
            let (ax, ay) = grid.center(a.0, a.1);
            let (bx, by) = grid.center(b.0, b.1);
            ((ax - mx).hypot(ay - my)).total_cmp(&(bx - mx).hypot(by - my))
        })
        .expect("nonempty hole");
    let (x, y) = grid.center(i, j);
    [x, y]
}

/// Jittered triangulated rectangle with the `DomainSpec` holes removed.
pub fn grid_domain(spec: &DomainSpec) -> Result<Domain> {
    spec.validate()?;
    let (grid, removed) =
        fit_grid(spec.width, spec.height, spec.target_nodes, |g| hole_squares(g, &spec.holes).map(|r| r.0))?;
    let (_, sets) = hole_squares(&grid, &spec.holes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (faces, coords, _) = triangulate(&grid, &removed, spec.jitter, &mut rng);
    let coords = coords.iter().map(|p| p.to_vec()).collect();
    let surface = build_surface(&faces, Some(coords), None)?;
    let anchors: Vec<[f64; 2]> = sets.iter().map(|set| square_anchor(&grid, set)).collect();
    let truth = align_anchors(&surface, &anchors)?;
    Ok(Domain { surface, truth })
}

/// Closed torus from an `nx x ny` periodic grid, embedded in 3D, with
/// diagonals chosen by a seeded coin.
pub fn torus(nx: usize, ny: usize, seed: u64) -> Result<CombinatorialSurface> {
    if nx < 3 || ny < 3 {
        return Err(NetgenError::InvalidSpec("torus needs at least 3 x 3 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    let (big, small) = (2.0, 0.8);
    let coords = (0..nx * ny)
        .map(|n| {
            let u = std::f64::consts::TAU * (n % nx) as f64 / nx as f64;
            let v = std::f64::consts::TAU * (n / nx) as f64 / ny as f64;
            let r = big + small * v.cos();
            vec![r * u.cos(), r * u.sin(), small * v.sin()]
        })
        .collect();
    Ok(build_surface(&faces, Some(coords), None)?)
}
