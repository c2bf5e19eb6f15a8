//! Oriented triangulated 2-complexes with marked hole loops.
//!
//! A [`CombinatorialSurface`] stores every undirected edge once, oriented
//! from the lower to the higher node id. Faces are node triples listed
//! counterclockwise; the face that traverses a canonical edge `u -> v` in its
//! own boundary is the *left* face of that edge, the other one is the *right*
//! face.
//!
//! Hole loops are stored counterclockwise around the hole, i.e. with the
//! domain on the right. The outer loop keeps the induced boundary orientation
//! (domain on the left).

mod build;
mod cochain;
mod cover;
pub mod io;
mod ops;

use std::collections::HashMap;

use thiserror::Error;

pub use build::HoleMarks;
pub(crate) use cochain::check_len;
pub use cochain::{Cochain0, Cochain1, Cochain2, DirectedEdge, EdgeWalk};
pub use cover::{DoubleCover, Restricted, ASYMMETRY_TOLERANCE};
pub use ops::{d0, d1, delta1, delta2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("face list is empty")]
    NoFaces,
    #[error("face {face} references node {node}, but only {n_nodes} nodes exist")]
    NodeOutOfRange { face: usize, node: usize, n_nodes: usize },
    #[error("face {face} repeats node {node}")]
    DegenerateFace { face: usize, node: usize },
    #[error("node {node} is not used by any face")]
    IsolatedNode { node: usize },
    #[error("edge ({u}, {v}) has {count} incident faces")]
    NonManifoldEdge { u: usize, v: usize, count: usize },
    #[error("faces {first} and {second} both traverse edge {u}->{v}")]
    InconsistentOrientation { u: usize, v: usize, first: usize, second: usize },
    #[error("the faces around node {node} do not form a single fan")]
    NonManifoldVertex { node: usize },
    #[error("node graph has {components} connected components")]
    Disconnected { components: usize },
    #[error("Euler characteristic {chi} is impossible with {boundaries} boundary loops")]
    EulerMismatch { chi: i64, boundaries: usize },
    #[error("{loops} boundary loops and neither coordinates nor hole marks to tell the outer one")]
    AmbiguousOuterLoop { loops: usize },
    #[error("hole mark {index} does not match any boundary loop")]
    UnknownHoleMark { index: usize },
    #[error("{unmarked} boundary loops left unmarked; at most one outer loop is allowed")]
    TooManyOuterLoops { unmarked: usize },
    #[error("coordinates given for {got} nodes, surface has {expected}")]
    CoordCount { got: usize, expected: usize },
    #[error("coordinates must have 2 or 3 components, got {0}")]
    CoordDim(usize),
    #[error("surface is closed; a double cover needs at least one boundary loop")]
    AlreadyClosed,
    #[error("({u}, {v}) is not an edge")]
    NotAnEdge { u: usize, v: usize },
    #[error("nodes {u} and {v} are joined by more than one edge")]
    AmbiguousEdge { u: usize, v: usize },
    #[error("node {0} is out of range")]
    UnknownNode(usize),
    #[error("cochain has {got} values, expected {expected}")]
    CochainLength { got: usize, expected: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SurfaceError>;

/// One incident edge in a node's star.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
    /// True when the node is the canonical tail of `edge`.
    pub outgoing: bool,
}

impl Incidence {
    /// The edge traversed away from the star's center.
    pub fn away(&self) -> DirectedEdge {
        DirectedEdge { edge: self.edge, forward: self.outgoing }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    /// Node cycle in the induced boundary orientation (domain on the left),
    /// rotated to start at its smallest node id. The closing hop is implicit.
    pub nodes: Vec<usize>,
    pub is_hole: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PairSlot {
    Single(usize),
    Multiple,
}

#[derive(Debug, Clone)]
pub struct CombinatorialSurface {
    n_nodes: usize,
    coord_dim: usize,
    coords: Option<Vec<[f64; 3]>>,
    faces: Vec<[usize; 3]>,
    face_edges: Vec<[DirectedEdge; 3]>,
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<[Option<usize>; 2]>,
    pair_index: HashMap<(usize, usize), PairSlot>,
    loops: Vec<BoundaryLoop>,
    star_offsets: Vec<usize>,
    star: Vec<Incidence>,
}

/// Builds and validates a surface from counterclockwise triangles.
///
/// `coords` holds one 2- or 3-component point per node. Without hole marks,
/// the boundary loop with the largest bounding box is taken as the outer
/// loop; without coordinates either, a surface with two or more boundary
/// loops is rejected as ambiguous.
pub fn build_surface(
    faces: &[[usize; 3]],
    coords: Option<Vec<Vec<f64>>>,
    hole_marks: Option<HoleMarks>,
) -> Result<CombinatorialSurface> {
    build::build_surface(faces, coords, hole_marks)
}

impl CombinatorialSurface {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Canonical edges as `[tail, head]` with `tail < head`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// The three boundary edges of `face`, directed counterclockwise.
    pub fn face_edges(&self, face: usize) -> &[DirectedEdge; 3] {
        &self.face_edges[face]
    }

    /// `[left, right]` faces of a canonical edge.
    pub fn edge_faces(&self, edge: usize) -> [Option<usize>; 2] {
        self.edge_faces[edge]
    }

    pub fn star(&self, node: usize) -> &[Incidence] {
        &self.star[self.star_offsets[node]..self.star_offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.star_offsets[node + 1] - self.star_offsets[node]
    }

    /// Faces sharing an edge with `face`, in the order of the face's edges.
    /// A face glued to itself or to another face twice appears repeatedly.
    pub fn dual_neighbors(&self, face: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_edges[face].iter().filter_map(move |d| {
            let [l, r] = self.edge_faces[d.edge];
            if d.forward {
                r
            } else {
                l
            }
        })
    }

    pub fn coord_dim(&self) -> usize {
        self.coord_dim
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn position(&self, node: usize) -> Option<[f64; 3]> {
        self.coords.as_ref().map(|c| c[node])
    }

    pub fn position2(&self, node: usize) -> Option<[f64; 2]> {
        self.position(node).map(|p| [p[0], p[1]])
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn is_closed(&self) -> bool {
        self.loops.is_empty()
    }

    /// Hole loops oriented counterclockwise around their hole.
    pub fn hole_loops(&self) -> Vec<Vec<usize>> {
        self.loops
            .iter()
            .filter(|l| l.is_hole)
            .map(|l| counterclockwise_around_hole(&l.nodes))
            .collect()
    }

    pub fn outer_loop(&self) -> Option<&[usize]> {
        self.loops.iter().find(|l| !l.is_hole).map(|l| l.nodes.as_slice())
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        let [l, r] = self.edge_faces[edge];
        l.is_none() || r.is_none()
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.star(node).iter().any(|inc| self.is_boundary_edge(inc.edge))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_nodes as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn genus(&self) -> usize {
        ((2 - self.loops.len() as i64 - self.euler_characteristic()) / 2) as usize
    }

    /// Rank of the first homology group: `2g` when closed, `2g + b - 1`
    /// with `b` boundary loops.
    pub fn betti1(&self) -> usize {
        if self.is_closed() {
            (2 - self.euler_characteristic()) as usize
        } else {
            (1 - self.euler_characteristic()) as usize
        }
    }

    /// The unique edge joining `u` and `v`, directed `u -> v`.
    pub fn directed_edge(&self, u: usize, v: usize) -> Result<DirectedEdge> {
        if u >= self.n_nodes {
            return Err(SurfaceError::UnknownNode(u));
        }
        if v >= self.n_nodes {
            return Err(SurfaceError::UnknownNode(v));
        }
        let key = (u.min(v), u.max(v));
        match self.pair_index.get(&key) {
            Some(PairSlot::Single(e)) => Ok(DirectedEdge { edge: *e, forward: u < v }),
            Some(PairSlot::Multiple) => Err(SurfaceError::AmbiguousEdge { u, v }),
            None => Err(SurfaceError::NotAnEdge { u, v }),
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.directed_edge(u, v).is_ok()
    }

    /// Directed walk through consecutive nodes of `nodes`.
    pub fn walk(&self, nodes: &[usize]) -> Result<EdgeWalk> {
        let hops = nodes
            .windows(2)
            .map(|w| self.directed_edge(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeWalk::new(hops))
    }

    /// Directed walk around a node cycle, including the closing hop.
    pub fn cycle_walk(&self, cycle: &[usize]) -> Result<EdgeWalk> {
        let mut walk = self.walk(cycle)?;
        if let (Some(&last), Some(&first)) = (cycle.last(), cycle.first()) {
            if cycle.len() > 1 {
                walk.push(self.directed_edge(last, first)?);
            }
        }
        Ok(walk)
    }

    /// Topology fingerprint over node count, faces and hole loops.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!("v={}\n", self.n_nodes));
        for f in &self.faces {
            h.update(format!("t {} {} {}\n", f[0], f[1], f[2]));
        }
        for l in self.hole_loops() {
            h.update("hole");
            for n in l {
                h.update(format!(" {n}"));
            }
            h.update("\n");
        }
        hex::encode(h.finalize())[..16].to_string()
    }

    /// Median canonical edge length, when coordinates are present.
    pub fn median_edge_length(&self) -> Option<f64> {
        let coords = self.coords.as_ref()?;
        let mut lengths: Vec<f64> = self
            .edges
            .iter()
            .map(|[a, b]| distance(&coords[*a], &coords[*b]))
            .collect();
        lengths.sort_by(f64::total_cmp);
        lengths.get(lengths.len() / 2).copied()
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }

    /// Hop distances from `source` (`usize::MAX` when unreachable).
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_nodes];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for inc in self.star(v) {
                if dist[inc.neighbor] == usize::MAX {
                    dist[inc.neighbor] = dist[v] + 1;
                    queue.push_back(inc.neighbor);
                }
            }
        }
        dist
    }

    /// An unweighted shortest node path from `a` to `b`. Ties go to the
    /// lowest neighbor ids, so the result is deterministic.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        for n in [a, b] {
            if n >= self.n_nodes {
                return Err(SurfaceError::UnknownNode(n));
            }
        }
        let dist = self.bfs_distances(b);
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = self
                .star(cur)
                .iter()
                .map(|inc| inc.neighbor)
                .find(|&n| dist[n] + 1 == dist[cur])
                .expect("connected surface");
            path.push(cur);
        }
        Ok(path)
    }

    /// Index of the node closest to `p` (Euclidean, first two components
    /// when `p` is planar).
    pub fn nearest_node(&self, p: &[f64]) -> Option<usize> {
        let coords = self.coords.as_ref()?;
        let q = [p[0], p[1], p.get(2).copied().unwrap_or(0.0)];
        let mut best = (f64::INFINITY, 0);
        for (i, c) in coords.iter().enumerate() {
            let d = distance(c, &q);
            if d < best.0 {
                best = (d, i);
            }
        }
        Some(best.1)
    }

    pub(crate) fn raw_coords(&self) -> Option<&[[f64; 3]]> {
        self.coords.as_deref()
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn counterclockwise_around_hole(boundary: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = boundary.iter().rev().copied().collect();
    let start = out
        .iter()
        .enumerate()
        .min_by_key(|(_, n)| **n)
        .map(|(i, _)| i)
        .unwrap_or(0);
    out.rotate_left(start);
    out
}
