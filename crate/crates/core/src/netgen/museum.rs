use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{align_anchors, fit_grid, square_anchor, triangulate, GroundTruth, Rect, SquareGrid};
use super::{NetgenError, Result};
use crate::classify::Trajectory;
use crate::surface::{build_surface, CombinatorialSurface};

/// Floor plan: a grid of square rooms separated by walls with one door per
/// shared side. Wall pieces meeting at an interior junction listed in
/// `pillars` form a free-standing cross (a hole); pieces meeting the outer
/// wall are attached to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MuseumSpec {
    pub rooms_x: usize,
    pub rooms_y: usize,
    pub room_size: f64,
    /// Interior wall junctions `[a, b]` at `(a * room_size, b * room_size)`.
    pub pillars: Vec<[usize; 2]>,
    /// Extra free-standing obstacles, in world coordinates.
    pub obstacles: Vec<Rect>,
    pub border_walls: bool,
    /// Door width as a fraction of `room_size`.
    pub door: f64,
    pub target_nodes: usize,
    pub jitter: f64,
    pub seed: u64,
    pub entrance_room: [usize; 2],
    /// Defaults to the room diagonally opposite the entrance.
    pub exit_room: Option<[usize; 2]>,
    pub levels: usize,
    /// Ladders between each pair of consecutive levels.
    pub ladders: usize,
}

impl Default for MuseumSpec {
    fn default() -> Self {
        MuseumSpec {
            rooms_x: 5,
            rooms_y: 3,
            room_size: 10.0,
            pillars: vec![[1, 1], [2, 2], [3, 1], [4, 2], [2, 1]],
            obstacles: Vec::new(),
            border_walls: true,
            door: 0.4,
            target_nodes: 1500,
            jitter: 0.25,
            seed: 0,
            entrance_room: [0, 0],
            exit_room: None,
            levels: 1,
            ladders: 2,
        }
    }
}

impl MuseumSpec {
    fn exit(&self) -> [usize; 2] {
        self.exit_room.unwrap_or([self.rooms_x - 1, self.rooms_y - 1])
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NetgenError::InvalidSpec(m));
        if self.rooms_x == 0 || self.rooms_y == 0 || self.rooms_x * self.rooms_y < 2 {
            return bad("a museum needs at least two rooms".into());
        }
        if !(self.room_size > 0.0) || !(self.door > 0.0 && self.door < 1.0) {
            return bad("room_size must be positive and door in (0, 1)".into());
        }
        for p in &self.pillars {
            if p[0] == 0 || p[0] >= self.rooms_x || p[1] == 0 || p[1] >= self.rooms_y {
                return bad(format!("pillar {p:?} is not an interior junction"));
            }
        }
        let (e, x) = (self.entrance_room, self.exit());
        for r in [e, x] {
            if r[0] >= self.rooms_x || r[1] >= self.rooms_y {
                return bad(format!("room {r:?} outside the layout"));
            }
        }
        if e == x {
            return bad("entrance and exit rooms coincide".into());
        }
        if self.levels == 0 || (self.levels > 1 && self.ladders == 0) {
            return bad("need at least one level, and ladders between levels".into());
        }
        if !(0.0..0.5).contains(&self.jitter) || self.target_nodes < 20 {
            return bad("jitter must lie in [0, 0.5) and target_nodes be at least 20".into());
        }
        Ok(())
    }

    fn room_index(&self, r: [usize; 2]) -> usize {
        r[1] * self.rooms_x + r[0]
    }

    fn is_wall_junction(&self, a: usize, b: usize) -> bool {
        let border = a == 0 || b == 0 || a == self.rooms_x || b == self.rooms_y;
        (border && self.border_walls) || self.pillars.contains(&[a, b])
    }

    /// Wall pieces as axis-aligned segments `(x0, y0, x1, y1)`.
    fn wall_segments(&self) -> Vec<(f64, f64, f64, f64)> {
        let p = self.room_size;
        let half_gap = 0.5 * self.door * p;
        let mut out = Vec::new();
        for a in 1..self.rooms_x {
            let x = a as f64 * p;
            for b in 0..self.rooms_y {
                let mid = (b as f64 + 0.5) * p;
                if self.is_wall_junction(a, b) {
                    out.push((x, b as f64 * p, x, mid - half_gap));
                }
                if self.is_wall_junction(a, b + 1) {
                    out.push((x, mid + half_gap, x, (b + 1) as f64 * p));
                }
            }
        }
        for b in 1..self.rooms_y {
            let y = b as f64 * p;
            for a in 0..self.rooms_x {
                let mid = (a as f64 + 0.5) * p;
                if self.is_wall_junction(a, b) {
                    out.push((a as f64 * p, y, mid - half_gap, y));
                }
                if self.is_wall_junction(a + 1, b) {
                    out.push((mid + half_gap, y, (a + 1) as f64 * p, y));
                }
            }
        }
        out
    }

    /// Ladder centers for the level pair `(pair, pair + 1)`: room centers,
    /// spread over the rooms and shifted by one room per pair so a floor's
    /// upward and downward ladders never share a room.
    fn ladder_points(&self, pair: usize) -> Vec<[f64; 2]> {
        let n_rooms = self.rooms_x * self.rooms_y;
        (0..self.ladders)
            .map(|i| {
                let r = (i * n_rooms / self.ladders + pair) % n_rooms;
                let (a, b) = (r % self.rooms_x, r / self.rooms_x);
                [(a as f64 + 0.5) * self.room_size, (b as f64 + 0.5) * self.room_size]
            })
            .collect()
    }

    /// Removed squares of one floor; ladder blocks come back separately.
    fn floor_squares(&self, g: &SquareGrid, level: usize) -> (Vec<bool>, Vec<Vec<(usize, usize)>>) {
        let t = 0.75 * g.hx.max(g.hy);
        let walls = self.wall_segments();
        let mut removed = vec![false; g.nx * g.ny];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = g.center(i, j);
                let wall = walls.iter().any(|&(x0, y0, x1, y1)| {
                    x > x0 - t && x < x1 + t && y > y0 - t && y < y1 + t
                });
                let obstacle = self.obstacles.iter().any(|r| r.contains(x, y));
                removed[j * g.nx + i] = wall || obstacle;
            }
        }
        let mut ladders = Vec::new();
        let mut pairs = Vec::new();
        if level > 0 {
            pairs.push(level - 1);
        }
        if level + 1 < self.levels {
            pairs.push(level);
        }
        for pair in pairs {
            for c in self.ladder_points(pair) {
                let mut block = Vec::new();
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let (x, y) = g.center(i, j);
                        if (x - c[0]).abs() < g.hx && (y - c[1]).abs() < g.hy {
                            removed[j * g.nx + i] = true;
                            block.push((i, j));
                        }
                    }
                }
                ladders.push(block);
            }
        }
        (removed, ladders)
    }
}

/// Removed-square components (8-connected) that stay clear of the border.
fn hole_components(g: &SquareGrid, removed: &[bool]) -> Vec<Vec<(usize, usize)>> {
    let mut comp = vec![usize::MAX; removed.len()];
    let mut out = Vec::new();
    for start in 0..removed.len() {
        if !removed[start] || comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut squares = Vec::new();
        let mut touches = false;
        let mut queue = VecDeque::from([start]);
        comp[start] = id;
        while let Some(q) = queue.pop_front() {
            let (i, j) = (q % g.nx, q / g.nx);
            squares.push((i, j));
            if i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny {
                touches = true;
            }
            for nj in j.saturating_sub(1)..=(j + 1).min(g.ny - 1) {
                for ni in i.saturating_sub(1)..=(i + 1).min(g.nx - 1) {
                    let n = nj * g.nx + ni;
                    if removed[n] && comp[n] == usize::MAX {
                        comp[n] = id;
                        queue.push_back(n);
                    }
                }
            }
        }
        out.push((touches, squares));
    }
    out.into_iter().filter(|(t, _)| !t).map(|(_, s)| s).collect()
}

/// Node cycle around a rectangular block of squares, clockwise seen from
/// above.
fn block_ring(g: &SquareGrid, block: &[(usize, usize)]) -> Vec<usize> {
    let i0 = block.iter().map(|b| b.0).min().expect("block");
    let i1 = block.iter().map(|b| b.0).max().expect("block") + 1;
    let j0 = block.iter().map(|b| b.1).min().expect("block");
    let j1 = block.iter().map(|b| b.1).max().expect("block") + 1;
    let mut ring = Vec::new();
    for j in j0..j1 {
        ring.push(g.node(i0, j));
    }
    for i in i0..i1 {
        ring.push(g.node(i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        ring.push(g.node(i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        ring.push(g.node(i, j0));
    }
    ring
}

/// Rooms as nodes of a graph, doors as its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomGraph {
    pub rooms_x: usize,
    pub rooms_y: usize,
    /// Mesh nodes of each room (ground floor only).
    pub members: Vec<Vec<usize>>,
    pub adjacency: Vec<Vec<usize>>,
}

impl RoomGraph {
    pub fn n_rooms(&self) -> usize {
        self.members.len()
    }

    pub fn n_doors(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone)]
pub struct Museum {
    pub surface: CombinatorialSurface,
    pub rooms: RoomGraph,
    pub entrance: usize,
    pub exit: usize,
    pub entrance_room: usize,
    pub exit_room: usize,
    /// Hole anchors are only filled in for single-level museums.
    pub truth: GroundTruth,
}

pub fn museum_domain(spec: &MuseumSpec) -> Result<Museum> {
    spec.validate()?;
    let width = spec.rooms_x as f64 * spec.room_size;
    let height = spec.rooms_y as f64 * spec.room_size;
    let (grid, _) = fit_grid(width, height, spec.target_nodes, |g| Ok(spec.floor_squares(g, 0).0))?;
    let mut faces = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut maps = Vec::new();
    let mut ground_holes = Vec::new();
    let mut ladder_blocks = Vec::new();
    let mut ground_nodes = 0;
    for level in 0..spec.levels {
        let (removed, ladders) = spec.floor_squares(&grid, level);
        let holes = hole_components(&grid, &removed);
        let expected = spec.pillars.len() + spec.obstacles.len() + ladders.len();
        if holes.len() != expected {
            return Err(NetgenError::InvalidSpec(format!(
                "level {level}: expected {expected} free-standing walls, obstacles and ladders, found {} \
                 (some merge or touch the outer wall)",
                holes.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(level as u64);
        let (f, c, map) = triangulate(&grid, &removed, spec.jitter, &mut rng);
        let offset = coords.len();
        let flip = level % 2 == 1;
        faces.extend(f.iter().map(|t| {
            let t = t.map(|n| n + offset);
            if flip {
                [t[0], t[2], t[1]]
            } else {
                t
            }
        }));
        let z = level as f64 * 0.5 * spec.room_size;
        coords.extend(c.iter().map(|p| if spec.levels > 1 { vec![p[0], p[1], z] } else { vec![p[0], p[1]] }));
        maps.push(map.iter().map(|m| m.map(|n| n + offset)).collect::<Vec<_>>());
        if level == 0 {
            ground_nodes = c.len();
            ground_holes = holes;
        }
        ladder_blocks.push(ladders);
    }
    // ladder tubes between consecutive levels; floors alternate orientation
    for pair in 0..spec.levels.saturating_sub(1) {
        let lower_blocks = &ladder_blocks[pair];
        let lower_first = if pair == 0 { 0 } else { spec.ladders };
        for i in 0..spec.ladders {
            let block = &lower_blocks[lower_first + i];
            let mut ring = block_ring(&grid, block);
            if pair % 2 == 1 {
                ring.reverse();
            }
            let m = ring.len();
            let lo = |k: usize| maps[pair][ring[k % m]].expect("ring node");
            let hi = |k: usize| maps[pair + 1][ring[k % m]].expect("ring node");
            for k in 0..m {
                faces.push([lo(k + 1), lo(k), hi(k)]);
                faces.push([lo(k + 1), hi(k), hi(k + 1)]);
            }
        }
    }

    let mut surface = build_surface(&faces, Some(coords.clone()), None)?;
    let truth = if spec.levels == 1 {
        let anchors: Vec<[f64; 2]> = ground_holes.iter().map(|h| square_anchor(&grid, h)).collect();
        align_anchors(&surface, &anchors)?
    } else {
        let corner = maps[0][grid.node(0, 0)].expect("corner node");
        let marks: Vec<Vec<usize>> = surface
            .boundary_loops()
            .iter()
            .filter(|l| !l.nodes.contains(&corner))
            .map(|l| l.nodes.clone())
            .collect();
        surface = build_surface(&faces, Some(coords), Some(marks))?;
        GroundTruth { hole_count: surface.betti1(), anchors: Vec::new(), hole_loops: surface.hole_loops() }
    };

    let n_rooms = spec.rooms_x * spec.rooms_y;
    let room_of = |n: usize| -> usize {
        let p = surface.position2(n).expect("coords");
        let a = ((p[0] / spec.room_size).floor().max(0.0) as usize).min(spec.rooms_x - 1);
        let b = ((p[1] / spec.room_size).floor().max(0.0) as usize).min(spec.rooms_y - 1);
        b * spec.rooms_x + a
    };
    let mut members = vec![Vec::new(); n_rooms];
    for n in 0..ground_nodes {
        members[room_of(n)].push(n);
    }
    let mut adjacency = vec![Vec::new(); n_rooms];
    for &[u, v] in surface.edges() {
        if u >= ground_nodes || v >= ground_nodes {
            continue;
        }
        let (ru, rv) = (room_of(u), room_of(v));
        let side = ru.abs_diff(rv) == spec.rooms_x
            || (ru.abs_diff(rv) == 1 && ru / spec.rooms_x == rv / spec.rooms_x);
        if side && !adjacency[ru].contains(&rv) {
            adjacency[ru].push(rv);
            adjacency[rv].push(ru);
        }
    }
    for (room, adj) in adjacency.iter_mut().enumerate() {
        if adj.is_empty() {
            return Err(NetgenError::NoDoor { room });
        }
        adj.sort_unstable();
    }
    let rooms = RoomGraph { rooms_x: spec.rooms_x, rooms_y: spec.rooms_y, members, adjacency };
    let entrance_room = spec.room_index(spec.entrance_room);
    let exit_room = spec.room_index(spec.exit());
    if room_path_exists(&rooms, entrance_room, exit_room).is_none() {
        return Err(NetgenError::Unreachable);
    }
    let nearest_center = |r: usize| -> Result<usize> {
        let (a, b) = (r % spec.rooms_x, r / spec.rooms_x);
        let c = [(a as f64 + 0.5) * spec.room_size, (b as f64 + 0.5) * spec.room_size];
        rooms.members[r]
            .iter()
            .copied()
            .min_by(|&x, &y| {
                let (px, py) = (surface.position2(x).expect("coords"), surface.position2(y).expect("coords"));
                (px[0] - c[0]).hypot(px[1] - c[1]).total_cmp(&(py[0] - c[0]).hypot(py[1] - c[1]))
            })
            .ok_or_else(|| NetgenError::NoCandidates(format!("room {r}")))
    };
    let entrance = nearest_center(entrance_room)?;
    let exit = nearest_center(exit_room)?;
    Ok(Museum { surface, rooms, entrance, exit, entrance_room, exit_room, truth })
}

fn room_path_exists(g: &RoomGraph, a: usize, b: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; g.n_rooms()];
    dist[a] = 0;
    let mut queue = VecDeque::from([a]);
    while let Some(r) = queue.pop_front() {
        for &n in &g.adjacency[r] {
            if dist[n] == usize::MAX {
                dist[n] = dist[r] + 1;
                queue.push_back(n);
            }
        }
    }
    (dist[b] != usize::MAX).then_some(dist[b])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoomWalk {
    /// Uniform over neighboring rooms except the one just left, at most
    /// four times the room count in steps.
    #[default]
    NoBacktrack,
    /// Never revisits a room; dead ends restart the walk.
    Simple,
}

const WALK_ATTEMPTS: usize = 10_000;

fn room_sequence(m: &Museum, mode: RoomWalk, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let g = &m.rooms;
    let cap = 4 * g.n_rooms();
    for _ in 0..WALK_ATTEMPTS {
        let mut seq = vec![m.entrance_room];
        let mut visited = vec![false; g.n_rooms()];
        visited[m.entrance_room] = true;
        let mut ok = true;
        while *seq.last().expect("nonempty") != m.exit_room {
            if seq.len() > cap {
                ok = false;
                break;
            }
            let cur = *seq.last().expect("nonempty");
            let prev = seq.len().checked_sub(2).map(|i| seq[i]);
            let choices: Vec<usize> = match mode {
                RoomWalk::NoBacktrack => {
                    let c: Vec<usize> = g.adjacency[cur].iter().copied().filter(|&r| Some(r) != prev).collect();
                    if c.is_empty() {
                        g.adjacency[cur].clone()
                    } else {
                        c
                    }
                }
                RoomWalk::Simple => g.adjacency[cur].iter().copied().filter(|&r| !visited[r]).collect(),
            };
            let Some(&next) = choices.choose(rng) else {
                ok = false;
                break;
            };
            visited[next] = true;
            seq.push(next);
        }
        if ok {
            return Ok(seq);
        }
    }
    Err(NetgenError::Unreachable)
}

/// Two-level generation: a random room sequence from the entrance room to
/// the exit room, one random waypoint per intermediate room, consecutive
/// waypoints joined by shortest mesh paths.
pub fn museum_trajectories(m: &Museum, n: usize, seed: u64, mode: RoomWalk) -> Result<Vec<Trajectory>> {
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let rooms = room_sequence(m, mode, &mut rng)?;
        let mut waypoints = vec![m.entrance];
        for &r in &rooms[1..rooms.len() - 1] {
            let members = &m.rooms.members[r];
            if members.is_empty() {
                return Err(NetgenError::NoCandidates(format!("room {r}")));
            }
            waypoints.push(members[rng.gen_range(0..members.len())]);
        }
        waypoints.push(m.exit);
        let mut nodes = vec![m.entrance];
        for w in waypoints.windows(2) {
            nodes.extend_from_slice(&m.surface.shortest_path(w[0], w[1])?[1..]);
        }
        nodes.dedup();
        out.push(Trajectory::new(format!("m{t:04}"), nodes));
    }
    Ok(out)
}
