//! Doubling a bounded surface along its boundary into a closed one.
//!
//! Sheet 0 reuses the original node, edge-direction and face numbering; sheet
//! 1 holds mirrored copies of interior nodes and orientation-reversed copies
//! of every face. Boundary nodes and boundary edges are shared by both
//! sheets. An interior edge whose endpoints both lie on the boundary gets two
//! distinct cover edges joining the same node pair.

use log::warn;

use super::build::assemble;
use super::{
    Cochain0, Cochain1, Cochain2, CombinatorialSurface, DirectedEdge, Result, SurfaceError,
};

/// Largest sheet mismatch tolerated silently by the `restrict_*` methods.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DoubleCover {
    original: CombinatorialSurface,
    cover: CombinatorialSurface,
    node_map: Vec<[usize; 2]>,
    /// Image of each original canonical edge `tail -> head` on both sheets.
    edge_map: Vec<[DirectedEdge; 2]>,
    n_faces: usize,
    swap: Vec<usize>,
}

/// A cochain read back from sheet 0, with the largest mismatch between the
/// two sheets under the sheet-swap involution.
#[derive(Debug, Clone, PartialEq)]
pub struct Restricted<T> {
    pub value: T,
    pub asymmetry: f64,
}

impl DoubleCover {
    pub fn new(s: &CombinatorialSurface) -> Result<Self> {
        if s.is_closed() {
            return Err(SurfaceError::AlreadyClosed);
        }
        let v = s.n_nodes();
        let boundary: Vec<bool> = (0..v).map(|n| s.is_boundary_node(n)).collect();
        let mut node_map = Vec::with_capacity(v);
        let mut next = v;
        for (n, &on_boundary) in boundary.iter().enumerate() {
            if on_boundary {
                node_map.push([n, n]);
            } else {
                node_map.push([n, next]);
                next += 1;
            }
        }
        let n_cover = next;
        let f = s.n_faces();
        let mut faces = Vec::with_capacity(2 * f);
        let mut tags = Vec::with_capacity(2 * f);
        faces.extend_from_slice(s.faces());
        tags.extend(std::iter::repeat_n([0u8; 3], f));
        for fi in 0..f {
            let [a, b, c] = s.faces()[fi];
            let m = |n: usize| node_map[n][1];
            faces.push([m(a), m(c), m(b)]);
            // corners of the reversed face run a->c, c->b, b->a
            let fe = s.face_edges(fi);
            let chord = |d: &DirectedEdge| {
                let [t, h] = s.edges()[d.edge];
                u8::from(boundary[t] && boundary[h] && !s.is_boundary_edge(d.edge))
            };
            tags.push([chord(&fe[2]), chord(&fe[1]), chord(&fe[0])]);
        }
        let coords = s.raw_coords().map(|c| {
            let mut out = vec![[0.0; 3]; n_cover];
            for (n, maps) in node_map.iter().enumerate() {
                out[maps[0]] = c[n];
                out[maps[1]] = c[n];
            }
            out
        });
        let cover = assemble(n_cover, faces, Some(&tags), coords, s.coord_dim())?;
        debug_assert!(cover.is_closed());

        let mut edge_map = vec![[DirectedEdge { edge: 0, forward: true }; 2]; s.n_edges()];
        for fi in 0..f {
            let orig = s.face_edges(fi);
            let sheet0 = cover.face_edges(fi);
            let sheet1 = cover.face_edges(f + fi);
            for i in 0..3 {
                let d = orig[i];
                let img0 = sheet0[i];
                let img1 = sheet1[2 - i].reversed();
                let (img0, img1) =
                    if d.forward { (img0, img1) } else { (img0.reversed(), img1.reversed()) };
                edge_map[d.edge] = [img0, img1];
            }
        }
        let mut swap: Vec<usize> = (0..n_cover).collect();
        for maps in &node_map {
            swap[maps[0]] = maps[1];
            swap[maps[1]] = maps[0];
        }
        Ok(DoubleCover { original: s.clone(), cover, node_map, edge_map, n_faces: f, swap })
    }

    pub fn original(&self) -> &CombinatorialSurface {
        &self.original
    }

    pub fn cover(&self) -> &CombinatorialSurface {
        &self.cover
    }

    /// Cover node of original node `n` on `sheet` (0 or 1).
    pub fn node(&self, n: usize, sheet: usize) -> usize {
        self.node_map[n][sheet]
    }

    /// Cover image of the original canonical edge, directed like it.
    pub fn edge(&self, e: usize, sheet: usize) -> DirectedEdge {
        self.edge_map[e][sheet]
    }

    pub fn face(&self, f: usize, sheet: usize) -> usize {
        f + sheet * self.n_faces
    }

    /// The sheet-swap involution on cover nodes.
    pub fn swap_node(&self, n: usize) -> usize {
        self.swap[n]
    }

    /// Lifts a 1-form to the cover so that it is invariant under the sheet
    /// swap. The directed value on a sheet-1 copy equals the original
    /// directed value; shared boundary edges keep the original value.
    pub fn mirror_one_form(&self, w: &Cochain1) -> Cochain1 {
        let mut out = Cochain1::zeros(self.cover.n_edges());
        for (e, imgs) in self.edge_map.iter().enumerate() {
            for img in imgs {
                out[img.edge] = img.sign() * w[e];
            }
        }
        out
    }

    pub fn mirror_zero_form(&self, f: &Cochain0) -> Cochain0 {
        let mut out = Cochain0::zeros(self.cover.n_nodes());
        for (n, maps) in self.node_map.iter().enumerate() {
            out[maps[0]] = f[n];
            out[maps[1]] = f[n];
        }
        out
    }

    /// Face values change sign on sheet 1, whose faces carry the reversed
    /// orientation.
    pub fn mirror_two_form(&self, g: &Cochain2) -> Cochain2 {
        let mut out = Cochain2::zeros(self.cover.n_faces());
        for fi in 0..self.n_faces {
            out[fi] = g[fi];
            out[fi + self.n_faces] = -g[fi];
        }
        out
    }

    pub fn restrict_one_form(&self, c: &Cochain1) -> Restricted<Cochain1> {
        let mut value = Cochain1::zeros(self.original.n_edges());
        let mut asymmetry: f64 = 0.0;
        for (e, [img0, img1]) in self.edge_map.iter().enumerate() {
            value[e] = c.along(*img0);
            asymmetry = asymmetry.max((c.along(*img1) - value[e]).abs());
        }
        report(Restricted { value, asymmetry })
    }

    pub fn restrict_zero_form(&self, c: &Cochain0) -> Restricted<Cochain0> {
        let mut value = Cochain0::zeros(self.original.n_nodes());
        let mut asymmetry: f64 = 0.0;
        for (n, [a, b]) in self.node_map.iter().enumerate() {
            value[n] = c[*a];
            asymmetry = asymmetry.max((c[*b] - c[*a]).abs());
        }
        report(Restricted { value, asymmetry })
    }

    pub fn restrict_two_form(&self, c: &Cochain2) -> Restricted<Cochain2> {
        let mut value = Cochain2::zeros(self.n_faces);
        let mut asymmetry: f64 = 0.0;
        for fi in 0..self.n_faces {
            value[fi] = c[fi];
            asymmetry = asymmetry.max((c[fi + self.n_faces] + c[fi]).abs());
        }
        report(Restricted { value, asymmetry })
    }
}

fn report<T>(r: Restricted<T>) -> Restricted<T> {
    if r.asymmetry > ASYMMETRY_TOLERANCE {
        warn!("cochain is not symmetric under the sheet swap (asymmetry {:e})", r.asymmetry);
    }
    r
}
