use serde::{Deserialize, Serialize};

use super::{to_csv, DomainSource, Generated, PlotPoint, Result, SimError};
use crate::basis::{build_basis, canonicalize, BasisOptions, HarmonicBasis};
use crate::classify::{sigma_tuples, t_tuple, TTuple, Trajectory};
use crate::hodge::GossipConfig;
use crate::netgen::classed_paths;
use crate::oracle::{winding_geometric, TreeCotree};
use crate::surface::CombinatorialSurface;

fn default_per_class() -> usize {
    5
}

fn default_eps() -> f64 {
    5e-6
}

fn default_mu_range() -> [f64; 2] {
    [1e-8, 10.0]
}

fn default_steps() -> usize {
    10
}

fn default_reference() -> Option<[f64; 2]> {
    Some([1e-5, 1e-4])
}

/// Classed paths on a holes-in-a-row domain, compared pairwise against the
/// tree-cotree oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSpec {
    #[serde(default)]
    pub name: String,
    pub domain: DomainSource,
    /// Above (`true`) or below each hole, left to right. Empty picks
    /// all-above, all-below and the two alternating patterns.
    #[serde(default)]
    pub patterns: Vec<Vec<bool>>,
    #[serde(default = "default_per_class")]
    pub per_class: usize,
    #[serde(default)]
    pub path_seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub basis_seed: u64,
    #[serde(default)]
    pub canonical: bool,
    /// Ends of the log-spaced mu sweep.
    #[serde(default = "default_mu_range")]
    pub mu_range: [f64; 2],
    #[serde(default = "default_steps")]
    pub steps_per_decade: usize,
    /// Interval checked against the safe range.
    #[serde(default = "default_reference")]
    pub reference_mu: Option<[f64; 2]>,
}

impl ClassificationSpec {
    pub fn new(name: &str, domain: DomainSource) -> Self {
        ClassificationSpec {
            name: name.into(),
            domain,
            patterns: Vec::new(),
            per_class: default_per_class(),
            path_seed: 0,
            eps: default_eps(),
            basis_seed: 0,
            canonical: false,
            mu_range: default_mu_range(),
            steps_per_decade: default_steps(),
            reference_mu: default_reference(),
        }
    }

    /// 3 holes, 3000 nodes, 4 classes of 5 paths.
    pub fn fig8() -> Self {
        Self::new("fig8", DomainSource::HolesInRow { holes: 3, nodes: 3000, seed: 1 })
    }

    pub fn pattern_list(&self, holes: usize) -> Vec<Vec<bool>> {
        if !self.patterns.is_empty() {
            return self.patterns.clone();
        }
        let alt = |first: bool| (0..holes).map(|i| (i % 2 == 0) == first).collect::<Vec<_>>();
        vec![vec![true; holes], vec![false; holes], alt(true), alt(false)]
    }

    pub fn mu_grid(&self) -> Vec<f64> {
        mu_grid(self.mu_range, self.steps_per_decade)
    }

    fn validate(&self) -> Result<()> {
        let [a, b] = self.mu_range;
        if !(a > 0.0 && b > a && b.is_finite()) || self.steps_per_decade == 0 {
            return Err(SimError::InvalidSpec("mu_range must be 0 < lo < hi with steps_per_decade >= 1".into()));
        }
        if self.per_class == 0 {
            return Err(SimError::InvalidSpec("per_class must be at least 1".into()));
        }
        Ok(())
    }
}

/// Log-spaced values from `range[0]` up to at most `range[1]`.
pub fn mu_grid(range: [f64; 2], steps_per_decade: usize) -> Vec<f64> {
    let (l0, l1) = (range[0].log10(), range[1].log10());
    let n = ((l1 - l0) * steps_per_decade as f64 + 1e-9).floor() as usize;
    (0..=n).map(|i| 10f64.powf(l0 + i as f64 / steps_per_decade as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub a: String,
    pub b: String,
    pub sigma: f64,
    /// Tree-cotree classes agree.
    pub oracle_same: bool,
    /// Winding numbers around every hole anchor agree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_same: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mu: f64,
    pub agreement: f64,
}

/// Every pair is classified correctly exactly for `lo < mu <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeInterval {
    pub lo: f64,
    /// `None` when no pair differs.
    pub hi: Option<f64>,
    /// `log10(hi / lo)`; `None` when unbounded.
    pub decades: Option<f64>,
}

impl SafeInterval {
    pub fn contains(&self, mu: f64) -> bool {
        mu > self.lo && self.hi.is_none_or(|h| mu <= h)
    }

    /// At least `d` decades wide.
    pub fn wider_than(&self, d: f64) -> bool {
        self.decades.is_none_or(|w| w >= d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub name: String,
    pub n_nodes: usize,
    pub n_trajectories: usize,
    pub basis_size: usize,
    pub canonical: bool,
    pub eps: f64,
    pub pairs: Vec<PairResult>,
    /// Pairs left out for having different endpoints.
    pub skipped_pairs: usize,
    pub max_same_sigma: Option<f64>,
    pub min_diff_sigma: Option<f64>,
    pub safe_mu: Option<SafeInterval>,
    pub curve: Vec<CurvePoint>,
    /// Share of pairs on which the geometric and tree-cotree verdicts agree.
    pub geometric_agreement: Option<f64>,
    pub reference_mu: Option<[f64; 2]>,
    pub reference_inside: Option<bool>,
    pub reference_overlap: Option<bool>,
}

impl ClassificationReport {
    /// Fraction of pairs where `sigma < mu` matches the oracle.
    pub fn agreement(&self, mu: f64) -> f64 {
        agreement(&self.pairs, mu)
    }

    pub fn pairs_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            a: &'a str,
            b: &'a str,
            sigma: f64,
            oracle_same: bool,
            geometric_same: Option<bool>,
        }
        let rows: Vec<Row> = self
            .pairs
            .iter()
            .map(|p| Row { a: &p.a, b: &p.b, sigma: p.sigma, oracle_same: p.oracle_same, geometric_same: p.geometric_same })
            .collect();
        to_csv(&rows)
    }

    pub fn plot_csv(&self) -> String {
        let pts: Vec<PlotPoint> =
            self.curve.iter().map(|c| PlotPoint { x: c.mu, y: c.agreement, series: "agreement".into() }).collect();
        to_csv(&pts)
    }
}

fn agreement(pairs: &[PairResult], mu: f64) -> f64 {
    if pairs.is_empty() {
        return 1.0;
    }
    pairs.iter().filter(|p| (p.sigma < mu) == p.oracle_same).count() as f64 / pairs.len() as f64
}

/// Pairwise comparison of `trajs` under basis `b`. `anchors` adds the
/// geometric verdict when the surface has coordinates.
pub fn classification_study(
    name: &str,
    s: &CombinatorialSurface,
    b: &HarmonicBasis,
    trajs: &[Trajectory],
    anchors: Option<&[[f64; 2]]>,
    mu_values: &[f64],
    reference_mu: Option<[f64; 2]>,
) -> Result<ClassificationReport> {
    let tuples: Vec<TTuple> = trajs.iter().map(|t| t_tuple(t, b, s)).collect::<std::result::Result<_, _>>()?;
    let tc = TreeCotree::new(s);
    let mut pairs = Vec::new();
    let mut skipped = 0;
    let mut geo_agree = 0usize;
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let (ti, tj) = (&tuples[i], &tuples[j]);
            if ti.s != tj.s || ti.t != tj.t {
                skipped += 1;
                continue;
            }
            let sigma = sigma_tuples(ti, tj)?;
            // gamma_i followed by gamma_j backwards
            let mut cycle = trajs[i].nodes.clone();
            cycle.extend(trajs[j].nodes.iter().rev().skip(1));
            let oracle_same = tc.signature(s, &cycle)?.is_zero();
            let geometric_same = match anchors {
                Some(a) if s.has_coords() => Some(winding_geometric(&cycle, s, a)?.iter().all(|&w| w == 0)),
                _ => None,
            };
            if geometric_same == Some(oracle_same) {
                geo_agree += 1;
            }
            pairs.push(PairResult { a: trajs[i].id.clone(), b: trajs[j].id.clone(), sigma, oracle_same, geometric_same });
        }
    }
    let max_same = pairs.iter().filter(|p| p.oracle_same).map(|p| p.sigma).reduce(f64::max);
    let min_diff = pairs.iter().filter(|p| !p.oracle_same).map(|p| p.sigma).reduce(f64::min);
    let lo = max_same.unwrap_or(0.0);
    let safe_mu = match min_diff {
        Some(hi) if hi <= lo => None,
        hi => Some(SafeInterval { lo, hi, decades: hi.filter(|_| lo > 0.0).map(|h| (h / lo).log10()) }),
    };
    let curve = mu_values.iter().map(|&mu| CurvePoint { mu, agreement: agreement(&pairs, mu) }).collect();
    let with_geo = pairs.iter().filter(|p| p.geometric_same.is_some()).count();
    let geometric_agreement = (with_geo > 0).then(|| geo_agree as f64 / with_geo as f64);
    let (reference_inside, reference_overlap) = match reference_mu {
        Some([r0, r1]) => {
            let inside = safe_mu.is_some_and(|iv| iv.contains(r0) && iv.contains(r1));
            let overlap = safe_mu.is_some_and(|iv| r1 > iv.lo && iv.hi.is_none_or(|h| r0 <= h));
            (Some(inside), Some(overlap))
        }
        None => (None, None),
    };
    Ok(ClassificationReport {
        name: name.into(),
        n_nodes: s.n_nodes(),
        n_trajectories: trajs.len(),
        basis_size: b.len(),
        canonical: b.canonical,
        eps: b.eps,
        pairs,
        skipped_pairs: skipped,
        max_same_sigma: max_same,
        min_diff_sigma: min_diff,
        safe_mu,
        curve,
        geometric_agreement,
        reference_mu,
        reference_inside,
        reference_overlap,
    })
}

/// Builds the domain, the basis and the classed paths, then compares every
/// pair.
pub fn run_classification_study(spec: &ClassificationSpec) -> Result<ClassificationReport> {
    spec.validate()?;
    let built = spec.domain.build()?;
    let Generated::Grid(d) = &built else {
        return Err(SimError::InvalidSpec("classed paths need a planar grid domain".into()));
    };
    let s = &d.surface;
    let cfg = GossipConfig { seed: spec.basis_seed, ..GossipConfig::with_eps(spec.eps) };
    let mut b = build_basis(s, &cfg, &BasisOptions::default())?;
    if spec.canonical {
        b = canonicalize(&b, s)?;
    }
    let paths = classed_paths(d, &spec.pattern_list(d.truth.hole_count), spec.per_class, spec.path_seed)?;
    let trajs: Vec<Trajectory> = paths.into_iter().map(|p| p.trajectory).collect();
    classification_study(&spec.name, s, &b, &trajs, Some(&d.truth.anchors), &spec.mu_grid(), spec.reference_mu)
}
