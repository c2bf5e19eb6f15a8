use std::ops::{Index, IndexMut};

use super::{CombinatorialSurface, Result, SurfaceError};

/// A canonical edge together with a traversal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    /// True when traversed from the canonical tail to the head.
    pub forward: bool,
}

impl DirectedEdge {
    pub fn reversed(self) -> Self {
        DirectedEdge { edge: self.edge, forward: !self.forward }
    }

    pub fn sign(self) -> f64 {
        if self.forward {
            1.0
        } else {
            -1.0
        }
    }
}

/// A sequence of directed edges, e.g. a trajectory or a loop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeWalk {
    hops: Vec<DirectedEdge>,
}

impl EdgeWalk {
    pub fn new(hops: Vec<DirectedEdge>) -> Self {
        EdgeWalk { hops }
    }

    pub fn hops(&self) -> &[DirectedEdge] {
        &self.hops
    }

    pub fn push(&mut self, hop: DirectedEdge) {
        self.hops.push(hop);
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn reversed(&self) -> Self {
        EdgeWalk { hops: self.hops.iter().rev().map(|h| h.reversed()).collect() }
    }

    pub fn concat(&self, other: &EdgeWalk) -> Self {
        let mut hops = self.hops.clone();
        hops.extend_from_slice(&other.hops);
        EdgeWalk { hops }
    }
}

macro_rules! cochain_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
        #[serde(transparent)]
        pub struct $name {
            values: Vec<f64>,
        }

        impl $name {
            pub fn from_values(values: Vec<f64>) -> Self {
                $name { values }
            }

            pub fn zeros(len: usize) -> Self {
                $name { values: vec![0.0; len] }
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            pub fn rms(&self) -> f64 {
                if self.values.is_empty() {
                    return 0.0;
                }
                (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
            }

            pub fn norm(&self) -> f64 {
                self.dot(self).sqrt()
            }

            pub fn scaled(&self, c: f64) -> Self {
                $name { values: self.values.iter().map(|v| c * v).collect() }
            }

            pub fn add(&self, other: &Self) -> Self {
                $name { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
            }

            pub fn sub(&self, other: &Self) -> Self {
                $name { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
            }

            /// `self += c * other`
            pub fn axpy(&mut self, c: f64, other: &Self) {
                for (a, b) in self.values.iter_mut().zip(&other.values) {
                    *a += c * b;
                }
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.values[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.values[i]
            }
        }
    };
}

cochain_type!(
    /// Real values on nodes.
    Cochain0
);
cochain_type!(
    /// Real values on canonical edges. Reading an edge against its
    /// canonical direction negates the stored value.
    Cochain1
);
cochain_type!(
    /// Real values on faces.
    Cochain2
);

impl Cochain1 {
    pub fn along(&self, hop: DirectedEdge) -> f64 {
        hop.sign() * self.values[hop.edge]
    }

    /// Value on the directed edge `u -> v`.
    pub fn directed(&self, s: &CombinatorialSurface, u: usize, v: usize) -> Result<f64> {
        Ok(self.along(s.directed_edge(u, v)?))
    }

    /// Signed sum along a walk. Hops are first netted per edge and summed
    /// in edge order, so reversing a walk negates the result exactly.
    pub fn sum_along(&self, walk: &EdgeWalk) -> f64 {
        let mut net: Vec<(usize, i64)> =
            walk.hops().iter().map(|h| (h.edge, if h.forward { 1 } else { -1 })).collect();
        net.sort_unstable_by_key(|x| x.0);
        let mut total = 0.0;
        let mut i = 0;
        while i < net.len() {
            let e = net[i].0;
            let mut count = 0;
            while i < net.len() && net[i].0 == e {
                count += net[i].1;
                i += 1;
            }
            if count != 0 {
                total += count as f64 * self.values[e];
            }
        }
        total
    }

    /// Linear combination `sum_j coeffs[j] * forms[j]`.
    pub fn combination(forms: &[Cochain1], coeffs: &[f64]) -> Cochain1 {
        let len = forms.first().map_or(0, Cochain1::len);
        let mut out = Cochain1::zeros(len);
        for (f, c) in forms.iter().zip(coeffs) {
            out.axpy(*c, f);
        }
        out
    }
}

pub(crate) fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(SurfaceError::CochainLength { got, expected });
    }
    Ok(())
}
