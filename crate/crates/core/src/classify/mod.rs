//! Trajectory classification by integrating harmonic forms along paths.

mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, HarmonicBasis};
use crate::surface::{CombinatorialSurface, SurfaceError};

pub use trace::{read_trajectories, snap_trace, write_trajectories, TraceInput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("trajectory {id} needs at least two distinct nodes")]
    TooShort { id: String },
    #[error("trajectory {id}: no edge between {u} and {v}")]
    InvalidHop { id: String, u: usize, v: usize },
    #[error("endpoints differ: ({s1}, {t1}) vs ({s2}, {t2})")]
    EndpointMismatch { s1: usize, t1: usize, s2: usize, t2: usize },
    #[error("trajectory {id} is not closed")]
    NotClosed { id: String },
    #[error("winding vectors need a canonical basis")]
    NotCanonical,
    #[error("mu must be positive and finite, got {0}")]
    InvalidMu(f64),
    #[error("surface has no coordinates to snap against")]
    NoCoordinates,
    #[error("trajectory input line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

/// A path on the surface as a node sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub nodes: Vec<usize>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, nodes: Vec<usize>) -> Self {
        Trajectory { id: id.into(), nodes }
    }

    pub fn source(&self) -> Option<usize> {
        self.nodes.first().copied()
    }

    pub fn target(&self) -> Option<usize> {
        self.nodes.last().copied()
    }

    pub fn is_closed(&self) -> bool {
        self.nodes.len() > 1 && self.source() == self.target()
    }

    /// Checks that every hop is an edge and that the path has length.
    pub fn validate(&self, s: &CombinatorialSurface) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(ClassifyError::TooShort { id: self.id.clone() });
        }
        for w in self.nodes.windows(2) {
            if w[0] >= s.n_nodes() || w[1] >= s.n_nodes() || !s.has_edge(w[0], w[1]) {
                return Err(ClassifyError::InvalidHop { id: self.id.clone(), u: w[0], v: w[1] });
            }
        }
        Ok(())
    }
}

/// Endpoints and per-form path integrals of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTuple {
    pub s: usize,
    pub t: usize,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub mu: f64,
    /// Bucket by rounded integral differences; needs a canonical basis.
    pub quantize: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { mu: 0.5, quantize: false }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(ClassifyError::InvalidMu(self.mu));
        }
        Ok(())
    }
}

/// Integral of `w` along the trajectory.
pub fn path_integral(w: &crate::surface::Cochain1, traj: &Trajectory, s: &CombinatorialSurface) -> Result<f64> {
    traj.validate(s)?;
    Ok(w.sum_along(&s.walk(&traj.nodes)?))
}

pub fn t_tuple(traj: &Trajectory, b: &HarmonicBasis, s: &CombinatorialSurface) -> Result<TTuple> {
    traj.validate(s)?;
    let walk = s.walk(&traj.nodes)?;
    Ok(TTuple {
        s: traj.nodes[0],
        t: *traj.nodes.last().unwrap(),
        h: b.forms.iter().map(|w| w.sum_along(&walk)).collect(),
    })
}

/// Largest per-form gap between integral vectors; endpoints must agree.
pub fn sigma_tuples(a: &TTuple, b: &TTuple) -> Result<f64> {
    if a.s != b.s || a.t != b.t {
        return Err(ClassifyError::EndpointMismatch { s1: a.s, t1: a.t, s2: b.s, t2: b.t });
    }
    Ok(a.h.iter().zip(&b.h).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

pub fn sigma(g1: &Trajectory, g2: &Trajectory, b: &HarmonicBasis, s: &CombinatorialSurface) -> Result<f64> {
    sigma_tuples(&t_tuple(g1, b, s)?, &t_tuple(g2, b, s)?)
}

/// Same class when `sigma < mu`.
pub fn same_class(
    g1: &Trajectory,
    g2: &Trajectory,
    b: &HarmonicBasis,
    s: &CombinatorialSurface,
    cfg: &ClassifierConfig,
) -> Result<bool> {
    cfg.validate()?;
    Ok(sigma(g1, g2, b, s)? < cfg.mu)
}

/// Rounded per-form integrals of a closed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub vector: Vec<i64>,
    /// Largest distance of an integral from its rounded value.
    pub residual: f64,
    /// Rounding is unreliable past 0.25.
    pub reliable: bool,
}

pub fn winding_vector(cycle: &Trajectory, b: &HarmonicBasis, s: &CombinatorialSurface) -> Result<Winding> {
    if !cycle.is_closed() {
        return Err(ClassifyError::NotClosed { id: cycle.id.clone() });
    }
    if !b.canonical {
        return Err(ClassifyError::NotCanonical);
    }
    let tt = t_tuple(cycle, b, s)?;
    let vector: Vec<i64> = tt.h.iter().map(|x| x.round() as i64).collect();
    let residual = tt.h.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
    Ok(Winding { vector, residual, reliable: residual <= 0.25 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub key: String,
    pub s: usize,
    pub t: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BucketSummary {
    pub n_buckets: usize,
    pub max_bucket: usize,
    pub n_singletons: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BucketReport {
    pub buckets: Vec<Bucket>,
    pub summary: BucketSummary,
    /// Pairs whose distance sits in `[mu/2, 2 mu]`, or in quantized mode
    /// trajectories with an integral difference far from an integer.
    pub near_threshold: Vec<(String, String)>,
}

impl BucketReport {
    /// Flat view: one `key,s,t,id` row per trajectory.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,s,t,id\n");
        for b in &self.buckets {
            for id in &b.ids {
                out.push_str(&format!("{},{},{},{}\n", b.key, b.s, b.t, id));
            }
        }
        out
    }

    /// Bucket index of every trajectory id.
    pub fn assignment(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (i, b) in self.buckets.iter().enumerate() {
            for id in &b.ids {
                m.insert(id.clone(), i);
            }
        }
        m
    }
}

/// Residual above which a quantized key is flagged as unreliable.
const QUANTIZE_FLAG: f64 = 0.25;

/// Groups trajectories by endpoints, then by class. Quantized mode keys each
/// trajectory by its rounded integral difference to the first member of its
/// endpoint group; otherwise pairs under `mu` are merged transitively.
pub fn bucketize(
    trajs: &[Trajectory],
    b: &HarmonicBasis,
    s: &CombinatorialSurface,
    cfg: &ClassifierConfig,
) -> Result<BucketReport> {
    cfg.validate()?;
    let tuples = trajs.iter().map(|t| t_tuple(t, b, s)).collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, tt) in tuples.iter().enumerate() {
        groups.entry((tt.s, tt.t)).or_default().push(i);
    }
    for members in groups.values_mut() {
        members.sort_by(|&a, &b| trajs[a].id.cmp(&trajs[b].id).then(a.cmp(&b)));
    }
    let quantize = cfg.quantize && b.canonical;
    if cfg.quantize && !b.canonical {
        log::warn!("quantized bucketing needs a canonical basis; merging by threshold instead");
    }
    let mut buckets = Vec::new();
    let mut near = Vec::new();
    for ((gs, gt), members) in groups {
        if quantize {
            let base = &tuples[members[0]].h;
            let mut keyed: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
            let mut order = Vec::new();
            for &i in &members {
                let diff: Vec<f64> = tuples[i].h.iter().zip(base).map(|(x, y)| x - y).collect();
                let key: Vec<i64> = diff.iter().map(|x| x.round() as i64).collect();
                let off = diff.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
                if off > QUANTIZE_FLAG {
                    near.push((trajs[members[0]].id.clone(), trajs[i].id.clone()));
                }
                if !keyed.contains_key(&key) {
                    order.push(key.clone());
                }
                keyed.entry(key).or_default().push(i);
            }
            for key in order {
                let ids = keyed[&key].iter().map(|&i| trajs[i].id.clone()).collect();
                let k: Vec<String> = key.iter().map(i64::to_string).collect();
                buckets.push(Bucket { key: format!("{gs}-{gt}:[{}]", k.join(",")), s: gs, t: gt, ids });
            }
        } else {
            let n = members.len();
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for a in 0..n {
                for c in a + 1..n {
                    let d = sigma_tuples(&tuples[members[a]], &tuples[members[c]])?;
                    if d < cfg.mu {
                        let (ra, rc) = (find(&mut parent, a), find(&mut parent, c));
                        // lower index stays root so buckets come out in id order
                        parent[ra.max(rc)] = ra.min(rc);
                    }
                    if d >= 0.5 * cfg.mu && d <= 2.0 * cfg.mu {
                        near.push((trajs[members[a]].id.clone(), trajs[members[c]].id.clone()));
                    }
                }
            }
            let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for a in 0..n {
                let r = find(&mut parent, a);
                by_root.entry(r).or_default().push(members[a]);
            }
            for (j, (_, idx)) in by_root.into_iter().enumerate() {
                let ids = idx.iter().map(|&i| trajs[i].id.clone()).collect();
                buckets.push(Bucket { key: format!("{gs}-{gt}:{j}"), s: gs, t: gt, ids });
            }
        }
    }
    let summary = BucketSummary {
        n_buckets: buckets.len(),
        max_bucket: buckets.iter().map(|b| b.ids.len()).max().unwrap_or(0),
        n_singletons: buckets.iter().filter(|b| b.ids.len() == 1).count(),
    };
    Ok(BucketReport { buckets, summary, near_threshold: near })
}

#[cfg(test)]
mod tests;
