use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{closed_body, Result};
use crate::surface::{CombinatorialSurface, EdgeWalk};

/// Signed crossing counts of a cycle, one entry per generator edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologySignature(pub Vec<i64>);

impl HomologySignature {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        HomologySignature(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        HomologySignature(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// A spanning tree of the node graph, a spanning tree of the dual graph
/// avoiding it, and the leftover generator edges. Each generator carries an
/// integer cocycle that vanishes on the tree, is 1 on its own edge and 0 on
/// the other generators.
#[derive(Debug, Clone)]
pub struct TreeCotree {
    generators: Vec<usize>,
    /// `cocycles[e * k + i]` is cocycle `i` on canonical edge `e`.
    cocycles: Vec<i64>,
    n_edges: usize,
    /// BFS tree parent of each node; the root points at itself.
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl TreeCotree {
    pub fn new(s: &CombinatorialSurface) -> Self {
        let ne = s.n_edges();
        let mut in_tree = vec![false; ne];
        let mut seen = vec![false; s.n_nodes()];
        let mut parent: Vec<usize> = (0..s.n_nodes()).collect();
        let mut depth = vec![0; s.n_nodes()];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        while let Some(v) = queue.pop_front() {
            for inc in s.star(v) {
                if !seen[inc.neighbor] {
                    seen[inc.neighbor] = true;
                    in_tree[inc.edge] = true;
                    parent[inc.neighbor] = v;
                    depth[inc.neighbor] = depth[v] + 1;
                    queue.push_back(inc.neighbor);
                }
            }
        }

        // dual BFS; a bounded surface gets a virtual root face behind
        // every boundary edge
        let nf = s.n_faces();
        let root = if s.is_closed() { 0 } else { nf };
        let mut in_cotree = vec![false; ne];
        let mut parent_edge = vec![usize::MAX; nf + 1];
        let mut visited = vec![false; nf + 1];
        let mut order = Vec::with_capacity(nf);
        visited[root] = true;
        let mut dq = VecDeque::new();
        if root == nf {
            for e in 0..ne {
                if in_tree[e] {
                    continue;
                }
                if let [Some(f), None] | [None, Some(f)] = s.edge_faces(e) {
                    if !visited[f] {
                        visited[f] = true;
                        in_cotree[e] = true;
                        parent_edge[f] = e;
                        order.push(f);
                        dq.push_back(f);
                    }
                }
            }
        } else {
            dq.push_back(root);
        }
        while let Some(f) = dq.pop_front() {
            let mut edges: Vec<usize> = s.face_edges(f).iter().map(|d| d.edge).collect();
            edges.sort_unstable();
            for e in edges {
                if in_tree[e] {
                    continue;
                }
                let [l, r] = s.edge_faces(e);
                let other = if l == Some(f) { r } else { l };
                if let Some(o) = other {
                    if !visited[o] {
                        visited[o] = true;
                        in_cotree[e] = true;
                        parent_edge[o] = e;
                        order.push(o);
                        dq.push_back(o);
                    }
                }
            }
        }

        let generators: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
        let k = generators.len();
        let mut cocycles = vec![0i64; ne * k];
        for (i, &g) in generators.iter().enumerate() {
            cocycles[g * k + i] = 1;
            for &f in order.iter().rev() {
                let pe = parent_edge[f];
                let mut sum = 0i64;
                let mut parent_sign = 0i64;
                for d in s.face_edges(f) {
                    let sign = if d.forward { 1 } else { -1 };
                    if d.edge == pe {
                        parent_sign = sign;
                    } else {
                        sum += sign * cocycles[d.edge * k + i];
                    }
                }
                cocycles[pe * k + i] = -sum * parent_sign;
            }
        }
        TreeCotree { generators, cocycles, n_edges: ne, parent, depth }
    }

    /// Generator edge ids, ascending.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn cocycle_value(&self, generator: usize, edge: usize) -> i64 {
        debug_assert!(edge < self.n_edges);
        self.cocycles[edge * self.generators.len() + generator]
    }

    pub fn signature_of_walk(&self, walk: &EdgeWalk) -> HomologySignature {
        let k = self.generators.len();
        let mut out = vec![0i64; k];
        for hop in walk.hops() {
            let sign = if hop.forward { 1 } else { -1 };
            let row = &self.cocycles[hop.edge * k..(hop.edge + 1) * k];
            for (o, c) in out.iter_mut().zip(row) {
                *o += sign * c;
            }
        }
        HomologySignature(out)
    }

    /// One node cycle per generator: its edge closed through the tree. The
    /// closing hop back to the first node is implied.
    pub fn fundamental_cycles(&self, s: &CombinatorialSurface) -> Vec<Vec<usize>> {
        self.generators
            .iter()
            .map(|&g| {
                let [a, b] = s.edges()[g];
                let (mut up_a, mut up_b) = (vec![a], vec![b]);
                let (mut x, mut y) = (a, b);
                while x != y {
                    if self.depth[x] >= self.depth[y] {
                        x = self.parent[x];
                        up_a.push(x);
                    } else {
                        y = self.parent[y];
                        up_b.push(y);
                    }
                }
                // b .. lca .. a, then a -> b along the generator
                up_a.pop();
                up_b.extend(up_a.into_iter().rev());
                up_b
            })
            .collect()
    }

    /// Signature of a closed node walk whose last node repeats the first.
    pub fn signature(&self, s: &CombinatorialSurface, cycle: &[usize]) -> Result<HomologySignature> {
        closed_body(cycle)?;
        Ok(self.signature_of_walk(&s.walk(cycle)?))
    }
}
