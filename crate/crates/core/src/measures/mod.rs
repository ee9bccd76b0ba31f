//! Finite-support probability measures: empirical measures, CDFs,
//! pushforwards and symmetric product powers.

mod space;
pub mod text;

pub use space::{FiniteSpace, GroundSpace, Point};

use crate::error::{Error, Result};

/// Tolerance accepted on the total mass of user-supplied weights before
/// renormalization.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of ordered tuples enumerated by
/// [`DiscreteMeasure::product_power`] and the exact m-step predictives.
pub const DEFAULT_TUPLE_BUDGET: usize = 1_000_000;

/// Sorts by atom, merges equal atoms, drops zero weights and renormalizes.
pub(crate) fn canonicalize<A: Ord>(mut pairs: Vec<(A, f64)>) -> Result<(Vec<A>, Vec<f64>)> {
    if pairs.is_empty() {
        return Err(Error::invalid("measure needs at least one atom"));
    }
    for (_, w) in &pairs {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::invalid(format!("weight {w} is not a nonnegative number")));
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut atoms: Vec<A> = Vec::with_capacity(pairs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
    for (a, w) in pairs {
        match atoms.last() {
            Some(last) if *last == a => *weights.last_mut().unwrap() += w,
            _ => {
                atoms.push(a);
                weights.push(w);
            }
        }
    }
    let mut i = 0;
    atoms.retain(|_| {
        let keep = weights[i] > 0.0;
        i += 1;
        keep
    });
    weights.retain(|w| *w > 0.0);
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((atoms, weights))
}

/// Probability measure with finitely many atoms on a [`GroundSpace`].
///
/// Atoms are kept sorted and distinct; weights are strictly positive and sum
/// to one up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    space: GroundSpace,
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(space: GroundSpace, atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        Self::from_pairs(space, atoms.into_iter().zip(weights).collect())
    }

    pub fn from_pairs(space: GroundSpace, pairs: Vec<(Point, f64)>) -> Result<Self> {
        for (p, _) in &pairs {
            space.check(p)?;
        }
        let (atoms, weights) = canonicalize(pairs)?;
        Ok(Self { space, atoms, weights })
    }

    pub fn dirac(space: GroundSpace, point: Point) -> Result<Self> {
        Self::from_pairs(space, vec![(point, 1.0)])
    }

    /// Uniform measure on the sample, duplicates merged.
    pub fn empirical(sample: &[Point], space: &GroundSpace) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::invalid("empirical measure of an empty sample"));
        }
        let w = 1.0 / sample.len() as f64;
        Self::from_pairs(space.clone(), sample.iter().map(|p| (p.clone(), w)).collect())
    }

    /// Empirical measure on a finite space from label counts.
    pub fn from_counts(space: &GroundSpace, counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::invalid("empirical measure of an empty sample"));
        }
        let pairs = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (Point::Label(j), c as f64 / n as f64))
            .collect();
        Self::from_pairs(space.clone(), pairs)
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight of a single point (zero when it is not an atom).
    pub fn mass_at(&self, p: &Point) -> f64 {
        self.atoms
            .binary_search(p)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// `∫ f dμ`.
    pub fn expect(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// Real atoms in increasing order with their weights.
    pub(crate) fn real_atoms(&self) -> Result<Vec<(f64, f64)>> {
        if !self.space.is_real_line() {
            return Err(Error::invalid(format!(
                "expected a measure on the real line, got {}",
                self.space.describe()
            )));
        }
        Ok(self
            .iter()
            .map(|(p, w)| (p.as_real().expect("real atom"), w))
            .collect())
    }

    /// Right-continuous distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let atoms = self.real_atoms()?;
        let k = atoms.partition_point(|(a, _)| *a <= x);
        if k == atoms.len() {
            return Ok(1.0);
        }
        Ok(atoms[..k].iter().map(|(_, w)| w).sum::<f64>().min(1.0))
    }

    /// Image measure on the real line under `g`.
    pub fn pushforward(&self, g: impl Fn(&Point) -> f64) -> Result<DiscreteMeasure> {
        let pairs = self
            .iter()
            .map(|(p, w)| {
                let y = g(p);
                if y.is_finite() {
                    Ok((Point::real(y), w))
                } else {
                    Err(Error::invalid(format!("map is not finite at {p}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteMeasure::from_pairs(GroundSpace::RealLine, pairs)
    }

    /// The m-fold product measure folded onto unordered m-tuples.
    pub fn product_power(&self, m: usize) -> Result<TupleMeasure> {
        self.product_power_with_budget(m, DEFAULT_TUPLE_BUDGET)
    }

    pub fn product_power_with_budget(&self, m: usize, budget: usize) -> Result<TupleMeasure> {
        let k = self.len();
        let tuples = tuple_count(k, m, budget)?;
        let mut pairs = Vec::with_capacity(tuples.min(1 << 16));
        for_each_index_tuple(k, m, |idx| {
            let w: f64 = idx.iter().map(|&i| self.weights[i]).product();
            let pts = idx.iter().map(|&i| self.atoms[i].clone()).collect();
            pairs.push((TupleClass::new_unchecked(pts), w));
        });
        TupleMeasure::from_pairs(self.space.clone(), m, pairs)
    }
}

/// Number of ordered m-tuples over k symbols, checked against `budget`.
pub(crate) fn tuple_count(k: usize, m: usize, budget: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::invalid("tuple length m must be positive"));
    }
    let mut total: usize = 1;
    for _ in 0..m {
        total = total.saturating_mul(k);
    }
    if total > budget {
        return Err(Error::ResourceLimit {
            what: "ordered tuples",
            requested: total,
            limit: budget,
        });
    }
    Ok(total)
}

/// Calls `f` on every index tuple of `{0..k}^m` in lexicographic order.
pub(crate) fn for_each_index_tuple(k: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let mut idx = vec![0usize; m];
    loop {
        f(&idx);
        let mut pos = m;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Point of the quotient space of m-tuples modulo permutations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TupleClass {
    points: Vec<Point>,
}

impl TupleClass {
    pub fn new(space: &GroundSpace, mut points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("tuple class needs at least one point"));
        }
        for p in &points {
            space.check(p)?;
        }
        points.sort();
        Ok(Self { points })
    }

    pub(crate) fn new_unchecked(mut points: Vec<Point>) -> Self {
        points.sort();
        Self { points }
    }

    /// Sorted representative.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// `(1/m) Σ δ_{x_i}`, the isometric image of the class in the measures.
    pub fn to_measure(&self, space: &GroundSpace) -> DiscreteMeasure {
        DiscreteMeasure::empirical(&self.points, space).expect("nonempty class")
    }
}

/// Probability measure on unordered m-tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleMeasure {
    space: GroundSpace,
    m: usize,
    atoms: Vec<TupleClass>,
    weights: Vec<f64>,
}

impl TupleMeasure {
    pub fn from_pairs(space: GroundSpace, m: usize, pairs: Vec<(TupleClass, f64)>) -> Result<Self> {
        for (c, _) in &pairs {
            if c.m() != m {
                return Err(Error::invalid(format!(
                    "tuple of length {} in a measure on {m}-tuples",
                    c.m()
                )));
            }
        }
        let (atoms, weights) = canonicalize(pairs)?;
        Ok(Self { space, m, atoms, weights })
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn atoms(&self) -> &[TupleClass] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TupleClass, f64)> + '_ {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    pub fn mass_at(&self, c: &TupleClass) -> f64 {
        self.atoms
            .binary_search(c)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// Law of one coordinate after spreading each class uniformly over its
    /// orderings.
    pub fn marginal(&self) -> DiscreteMeasure {
        let share = 1.0 / self.m as f64;
        let pairs = self
            .iter()
            .flat_map(|(c, w)| c.points().iter().map(move |p| (p.clone(), w * share)))
            .collect();
        DiscreteMeasure::from_pairs(self.space.clone(), pairs).expect("marginal of a probability")
    }
}
