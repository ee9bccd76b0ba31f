//! Distances between laws on `[S]` (finite mixtures of measures), built on a
//! chosen base metric between the measures themselves, and the quotient metric
//! on unordered tuples.

use super::determining::{dw, DeterminingClass};
use super::prokhorov::{prokhorov, prokhorov_from_matrix, prokhorov_separated};
use super::transport::{self, DEFAULT_PAIR_BUDGET};
use super::wasserstein::{ot_cost, w1_real};
use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, GroundSpace, Point, TupleClass, TupleMeasure, MASS_TOLERANCE};

/// A finitely supported law on `[S]`: measures `support[i]` with weights.
///
/// Supports are not merged; two equal measures at different indices simply
/// carry their weights separately, which changes none of the distances.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureOnMeasures {
    base_space: GroundSpace,
    support: Vec<DiscreteMeasure>,
    weights: Vec<f64>,
}

impl MeasureOnMeasures {
    pub fn new(support: Vec<DiscreteMeasure>, weights: Vec<f64>) -> Result<Self> {
        let Some(first) = support.first() else {
            return Err(Error::invalid("measure on measures needs a nonempty support"));
        };
        if support.len() != weights.len() {
            return Err(Error::invalid("support and weights differ in length"));
        }
        let base_space = first.space().clone();
        if support.iter().any(|m| *m.space() != base_space) {
            return Err(Error::invalid("support measures live on different spaces"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            base_space,
            support,
            weights,
        })
    }

    pub fn uniform(support: Vec<DiscreteMeasure>) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::new(support, weights)
    }

    pub fn dirac(mu: DiscreteMeasure) -> Self {
        Self {
            base_space: mu.space().clone(),
            support: vec![mu],
            weights: vec![1.0],
        }
    }

    pub fn base_space(&self) -> &GroundSpace {
        &self.base_space
    }

    pub fn support(&self) -> &[DiscreteMeasure] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// The mixture `Σ w_i μ_i`, a measure on `S`.
    pub fn mean(&self) -> Result<DiscreteMeasure> {
        let pairs = self
            .support
            .iter()
            .zip(&self.weights)
            .flat_map(|(m, &w)| m.iter().map(move |(p, v)| (p.clone(), v * w)))
            .collect();
        DiscreteMeasure::from_pairs(self.base_space.clone(), pairs)
    }
}

/// Metric on `[S]` used as ground distance at the second level.
#[derive(Clone, Copy, Debug)]
pub enum BaseMetric<'a> {
    Wasserstein1,
    Prokhorov,
    Determining(&'a DeterminingClass),
}

impl BaseMetric<'_> {
    pub fn distance(&self, a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
        match self {
            BaseMetric::Wasserstein1 if a.space().is_real_line() => w1_real(a, b),
            BaseMetric::Wasserstein1 => ot_cost(a, b, 1.0),
            BaseMetric::Prokhorov => match prokhorov_separated(a, b) {
                Some(v) => Ok(v),
                None => prokhorov(a, b),
            },
            BaseMetric::Determining(cls) => Ok(dw(a, b, cls)?.value),
        }
    }

    /// `d(support_i, e)` for every support measure.
    pub fn distances_to(&self, supports: &[DiscreteMeasure], e: &DiscreteMeasure) -> Result<Vec<f64>> {
        if let BaseMetric::Determining(cls) = self {
            if supports.iter().chain([e]).any(|m| m.space() != cls.space()) {
                return Err(Error::invalid("measure and determining class live on different spaces"));
            }
            let fe = cls.features(e);
            return Ok(supports
                .iter()
                .map(|m| cls.feature_distance(&cls.features(m), &fe))
                .collect());
        }
        supports.iter().map(|m| self.distance(m, e)).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseMetric::Wasserstein1 => "w1",
            BaseMetric::Prokhorov => "prokhorov",
            BaseMetric::Determining(_) => "dW",
        }
    }
}

/// Hat functions on `([S], d_base)` centered at anchor measures, with dyadic
/// radii interleaved the same way as on the ground space.
#[derive(Clone, Debug)]
pub struct AnchorClass {
    anchors: Vec<DiscreteMeasure>,
    /// `(anchor index, radius)` per generator, in series order.
    generators: Vec<(usize, f64)>,
}

impl AnchorClass {
    pub fn new(anchors: Vec<DiscreteMeasure>, levels: usize, truncation: usize) -> Result<Self> {
        if anchors.is_empty() || levels == 0 || truncation == 0 {
            return Err(Error::invalid("anchor class needs anchors, scales and a positive truncation"));
        }
        let space = anchors[0].space();
        if anchors.iter().any(|a| a.space() != space) {
            return Err(Error::invalid("anchors live on different spaces"));
        }
        let mut generators = Vec::new();
        'outer: for round in 0..anchors.len() {
            for level in 0..levels {
                if generators.len() == truncation {
                    break 'outer;
                }
                generators.push((round, 0.5f64.powi(level as i32)));
            }
        }
        Ok(Self { anchors, generators })
    }

    pub fn anchors(&self) -> &[DiscreteMeasure] {
        &self.anchors
    }

    pub fn truncation(&self) -> usize {
        self.generators.len()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.generators.iter().map(|g| g.1).collect()
    }

    pub fn tail_bound(&self) -> f64 {
        2.0 * 0.5f64.powi(self.truncation() as i32)
    }

    /// Normalized generator values at a measure, given its base distances to
    /// every anchor.
    pub fn features_from_distances(&self, to_anchor: &[f64]) -> Vec<f64> {
        self.generators
            .iter()
            .map(|&(a, r)| (1.0 - to_anchor[a] / r).clamp(0.0, 1.0) / (1.0 + 1.0 / r))
            .collect()
    }

    /// Normalized generator values at one measure.
    pub fn features(&self, p: &DiscreteMeasure, base: BaseMetric<'_>) -> Result<Vec<f64>> {
        let d = self
            .anchors
            .iter()
            .map(|a| base.distance(p, a))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.features_from_distances(&d))
    }

    fn mixture_features(&self, nu: &MeasureOnMeasures, base: BaseMetric<'_>) -> Result<Vec<f64>> {
        let mut to_anchor = vec![Vec::new(); self.anchors.len()];
        for (a, anchor) in self.anchors.iter().enumerate() {
            to_anchor[a] = base.distances_to(nu.support(), anchor)?;
        }
        let mut out = vec![0.0; self.truncation()];
        let mut row = vec![0.0; self.anchors.len()];
        for (i, &w) in nu.weights().iter().enumerate() {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = to_anchor[a][i];
            }
            for (o, f) in out.iter_mut().zip(self.features_from_distances(&row)) {
                *o += w * f;
            }
        }
        Ok(out)
    }
}

/// Metric at the second level.
#[derive(Clone, Copy, Debug)]
pub enum Level2Metric<'a> {
    Wasserstein1,
    Prokhorov,
    Determining(&'a AnchorClass),
}

fn check_same_base(a: &MeasureOnMeasures, b: &MeasureOnMeasures) -> Result<()> {
    if a.base_space() != b.base_space() {
        return Err(Error::invalid("laws on measures over different spaces"));
    }
    Ok(())
}

pub fn level2_dist(
    nu: &MeasureOnMeasures,
    target: &MeasureOnMeasures,
    which: Level2Metric<'_>,
    base: BaseMetric<'_>,
) -> Result<f64> {
    check_same_base(nu, target)?;
    match which {
        Level2Metric::Determining(cls) => {
            let a = cls.mixture_features(nu, base)?;
            let b = cls.mixture_features(target, base)?;
            Ok(series_distance(&a, &b))
        }
        Level2Metric::Wasserstein1 | Level2Metric::Prokhorov => {
            let (m, n) = (nu.len(), target.len());
            if m.saturating_mul(n) > DEFAULT_PAIR_BUDGET {
                return Err(Error::ResourceLimit {
                    what: "level-2 pairs",
                    requested: m * n,
                    limit: DEFAULT_PAIR_BUDGET,
                });
            }
            let mut cost = Vec::with_capacity(m * n);
            for p in nu.support() {
                for q in target.support() {
                    cost.push(base.distance(p, q)?);
                }
            }
            if matches!(which, Level2Metric::Wasserstein1) {
                Ok(transport::solve(nu.weights(), target.weights(), &cost)?.cost.max(0.0))
            } else {
                prokhorov_from_matrix(nu.weights(), target.weights(), &cost, DEFAULT_PAIR_BUDGET)
            }
        }
    }
}

/// `Σ_k 2^{-k} |a_k - b_k|` over feature vectors, `k` starting at 1.
pub fn series_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut weight = 1.0;
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            weight *= 0.5;
            weight * (x - y).abs()
        })
        .sum()
}

/// Level-2 transport distance to `δ_e`: the only coupling is the product, so
/// it is the expected base distance `Σ w_i d(p_i, e)`.
pub fn expected_distance_to(nu: &MeasureOnMeasures, e: &DiscreteMeasure, base: BaseMetric<'_>) -> Result<f64> {
    let d = base.distances_to(nu.support(), e)?;
    Ok(d.iter().zip(nu.weights()).map(|(d, w)| d * w).sum())
}

/// Level-2 Prokhorov distance to `δ_e`,
/// `inf{ε >= 0 : ν(d(·, e) > ε) <= ε}`, from the sorted base distances.
pub fn prokhorov_to_dirac(nu: &MeasureOnMeasures, e: &DiscreteMeasure, base: BaseMetric<'_>) -> Result<f64> {
    let d = base.distances_to(nu.support(), e)?;
    Ok(prokhorov_to_dirac_from_distances(&d, nu.weights()))
}

pub fn prokhorov_to_dirac_from_distances(d: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    // ε = 0 leaves every positive distance in the tail.
    let mut tail: f64 = order.iter().filter(|&&i| d[i] > 0.0).map(|&i| weights[i]).sum();
    let mut best = tail.min(1.0);
    let mut k = 0;
    while k < order.len() {
        let v = d[order[k]];
        while k < order.len() && d[order[k]] == v {
            if v > 0.0 {
                tail -= weights[order[k]];
            }
            k += 1;
        }
        best = best.min(v.max(tail.max(0.0)));
    }
    best.clamp(0.0, 1.0)
}

/// Tuple metric on `S^m_σ` induced by a metric on `[S]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientMetric {
    Wasserstein1,
    Prokhorov,
}

pub fn quotient_dist(space: &GroundSpace, a: &TupleClass, b: &TupleClass, which: QuotientMetric) -> Result<f64> {
    if a.m() != b.m() {
        return Err(Error::invalid(format!("tuple lengths {} and {} differ", a.m(), b.m())));
    }
    for p in a.points().iter().chain(b.points()) {
        space.check(p)?;
    }
    let (ma, mb) = (a.to_measure(space), b.to_measure(space));
    match which {
        QuotientMetric::Wasserstein1 => ot_cost(&ma, &mb, 1.0),
        QuotientMetric::Prokhorov => prokhorov(&ma, &mb),
    }
}

/// Distance between two laws on `S^m_σ`, with the same metric used between
/// tuples (the quotient metric) and between the laws.
pub fn tuple_law_dist(a: &TupleMeasure, b: &TupleMeasure, which: QuotientMetric) -> Result<f64> {
    if a.space() != b.space() || a.m() != b.m() {
        return Err(Error::invalid("tuple laws over different spaces or orders"));
    }
    if a.len().saturating_mul(b.len()) > DEFAULT_PAIR_BUDGET {
        return Err(Error::ResourceLimit {
            what: "tuple pairs",
            requested: a.len().saturating_mul(b.len()),
            limit: DEFAULT_PAIR_BUDGET,
        });
    }
    let space = a.space();
    let mut cost = Vec::with_capacity(a.len() * b.len());
    for s in a.atoms() {
        for t in b.atoms() {
            cost.push(quotient_dist(space, s, t, which)?);
        }
    }
    match which {
        QuotientMetric::Wasserstein1 => Ok(transport::solve(a.weights(), b.weights(), &cost)?.cost.max(0.0)),
        QuotientMetric::Prokhorov => prokhorov_from_matrix(a.weights(), b.weights(), &cost, DEFAULT_PAIR_BUDGET),
    }
}

/// Convenience for callers holding raw point lists.
pub fn quotient_dist_points(space: &GroundSpace, a: Vec<Point>, b: Vec<Point>, which: QuotientMetric) -> Result<f64> {
    quotient_dist(space, &TupleClass::new(space, a)?, &TupleClass::new(space, b)?, which)
}
