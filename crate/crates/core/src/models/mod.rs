//! Exchangeable sequences with conjugate priors: the prior draw of a directing
//! measure, the posterior given the first n observations, and the exact
//! predictive laws of the next m observations.

pub mod dirichlet;
pub mod dp;
pub mod seed;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

pub use dirichlet::{dirichlet_draw, FiniteDirichletModel};
pub use dp::{BaseMeasure, DpModel};

use crate::error::{Error, Result};
use crate::measures::{
    for_each_index_tuple, tuple_count, DiscreteMeasure, GroundSpace, Point, TupleClass, TupleMeasure,
    DEFAULT_TUPLE_BUDGET,
};
use crate::metrics::MeasureOnMeasures;

#[derive(Clone, Debug, PartialEq)]
pub enum ExchangeableModel {
    FiniteDirichlet(FiniteDirichletModel),
    DirichletProcess(DpModel),
}

impl ExchangeableModel {
    pub fn space(&self) -> GroundSpace {
        match self {
            ExchangeableModel::FiniteDirichlet(m) => m.space().clone(),
            ExchangeableModel::DirichletProcess(m) => m.space(),
        }
    }

    /// One directing measure drawn from the prior.
    pub fn draw_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteMeasure {
        match self {
            ExchangeableModel::FiniteDirichlet(m) => {
                let p = dirichlet_draw(m.concentration(), rng);
                labelled(m.space(), &p)
            }
            ExchangeableModel::DirichletProcess(m) => m.draw(rng),
        }
    }

    /// Draws `p̃` from the prior and then `n` i.i.d. observations from `p̃`.
    pub fn sample_sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(DiscreteMeasure, Vec<Point>)> {
        if n == 0 {
            return Err(Error::invalid("sequence length must be at least 1"));
        }
        let p = self.draw_prior(rng);
        let xs = sample_iid(&p, n, rng);
        Ok((p, xs))
    }
}

/// `n` i.i.d. draws from a finite measure.
pub fn sample_iid<R: Rng + ?Sized>(p: &DiscreteMeasure, n: usize, rng: &mut R) -> Vec<Point> {
    let alias = WeightedAliasIndex::new(p.weights().to_vec()).expect("positive weights");
    (0..n).map(|_| p.atoms()[alias.sample(rng)].clone()).collect()
}

fn labelled(space: &GroundSpace, p: &[f64]) -> DiscreteMeasure {
    let pairs = p.iter().enumerate().map(|(j, &w)| (Point::Label(j), w)).collect();
    DiscreteMeasure::from_pairs(space.clone(), pairs).expect("simplex point")
}

/// Posterior after n observations. The sufficient statistic is the count of
/// each distinct observed point, so any reordering of the data gives an equal
/// state.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorState {
    model: Arc<ExchangeableModel>,
    n: u64,
    counts: BTreeMap<Point, u64>,
}

impl PosteriorState {
    pub fn new(model: Arc<ExchangeableModel>) -> Self {
        Self {
            model,
            n: 0,
            counts: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &ExchangeableModel {
        &self.model
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<Point, u64> {
        &self.counts
    }

    pub fn update(&self, x: &Point) -> Result<Self> {
        let mut next = self.clone();
        next.observe(x)?;
        Ok(next)
    }

    pub fn observe(&mut self, x: &Point) -> Result<()> {
        self.model.space().check(x)?;
        *self.counts.entry(x.clone()).or_insert(0) += 1;
        self.n += 1;
        Ok(())
    }

    pub fn observe_all<'a>(&mut self, xs: impl IntoIterator<Item = &'a Point>) -> Result<()> {
        for x in xs {
            self.observe(x)?;
        }
        Ok(())
    }

    /// Posterior Dirichlet parameters `a_j + n_j` (finite Dirichlet only).
    pub fn concentration(&self) -> Option<Vec<f64>> {
        match &*self.model {
            ExchangeableModel::FiniteDirichlet(m) => Some(
                m.concentration()
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a + self.count_of(&Point::Label(j)) as f64)
                    .collect(),
            ),
            ExchangeableModel::DirichletProcess(_) => None,
        }
    }

    fn count_of(&self, x: &Point) -> u64 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    /// One exact draw from the posterior.
    ///
    /// For the process the posterior is `DP(α P_0 + Σ δ_{ξ_i})`, drawn as
    /// `Σ V_i δ_{x_i} + W P'` with `(V, W) ~ Dir(n_1, ..., n_k, α)` over the
    /// distinct observations and `P' ~ DP(α, P_0)` by truncated stick-breaking.
    pub fn draw_posterior<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteMeasure {
        match &*self.model {
            ExchangeableModel::FiniteDirichlet(m) => {
                let shapes = self.concentration().expect("finite model");
                labelled(m.space(), &dirichlet_draw(&shapes, rng))
            }
            ExchangeableModel::DirichletProcess(m) => {
                if self.n == 0 {
                    return m.draw(rng);
                }
                let mut shapes: Vec<f64> = self.counts.values().map(|&c| c as f64).collect();
                shapes.push(m.alpha());
                let v = dirichlet_draw(&shapes, rng);
                let w = v[v.len() - 1];
                let mut pairs: Vec<(Point, f64)> = self.counts.keys().cloned().zip(v.iter().copied()).collect();
                pairs.extend(m.stick_breaking(rng).into_iter().map(|(x, s)| (x, s * w)));
                DiscreteMeasure::from_pairs(m.space(), pairs).expect("posterior draw is a probability")
            }
        }
    }

    /// `count` i.i.d. posterior draws as a uniform law on measures.
    pub fn posterior_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<MeasureOnMeasures> {
        if count == 0 {
            return Err(Error::invalid("posterior sample count must be at least 1"));
        }
        MeasureOnMeasures::uniform((0..count).map(|_| self.draw_posterior(rng)).collect())
    }

    /// Urn form of the one-step predictive: support points with unnormalized
    /// weights `b_x`, so that the predictive is `b_x / Σ b`.
    fn urn(&self) -> (Vec<Point>, Vec<f64>) {
        match &*self.model {
            ExchangeableModel::FiniteDirichlet(_) => {
                let shapes = self.concentration().expect("finite model");
                ((0..shapes.len()).map(Point::Label).collect(), shapes)
            }
            ExchangeableModel::DirichletProcess(m) => {
                let mut b: BTreeMap<Point, f64> = BTreeMap::new();
                for (x, w) in m.base_representation().iter() {
                    *b.entry(x.clone()).or_insert(0.0) += m.alpha() * w;
                }
                for (x, &c) in &self.counts {
                    *b.entry(x.clone()).or_insert(0.0) += c as f64;
                }
                b.into_iter().unzip()
            }
        }
    }

    /// Law of the next observation: `(a_j + n_j)/(a_0 + n)` for the finite
    /// Dirichlet, `(α P_0 + Σ δ_{ξ_i})/(α + n)` for the process (with a
    /// continuous `P_0` replaced by its quantile grid).
    pub fn predictive_one(&self) -> DiscreteMeasure {
        let (points, b) = self.urn();
        let total: f64 = b.iter().sum();
        let pairs = points.into_iter().zip(b.into_iter().map(|w| w / total)).collect();
        DiscreteMeasure::from_pairs(self.model.space(), pairs).expect("predictive is a probability")
    }

    /// Exact law of the next `m` observations as unordered tuples, by the
    /// Pólya chain rule: an ordered tuple gets the product of the one-step
    /// predictives along the urn updated by the earlier entries.
    pub fn predictive_m(&self, m: usize) -> Result<TupleMeasure> {
        self.predictive_m_with_budget(m, DEFAULT_TUPLE_BUDGET)
    }

    pub fn predictive_m_with_budget(&self, m: usize, budget: usize) -> Result<TupleMeasure> {
        if m == 0 {
            return Err(Error::invalid("predictive order m must be at least 1"));
        }
        if let ExchangeableModel::DirichletProcess(dp) = &*self.model {
            if matches!(dp.base(), BaseMeasure::StandardNormal) {
                return Err(Error::Unsupported(
                    "exact m-step predictive of a process with continuous base measure".into(),
                ));
            }
        }
        let (points, b) = self.urn();
        let k = points.len();
        tuple_count(k, m, budget)?;
        let total: f64 = b.iter().sum();
        let mut added = vec![0.0; k];
        let mut pairs = Vec::new();
        for_each_index_tuple(k, m, |idx| {
            let mut w = 1.0;
            for (t, &i) in idx.iter().enumerate() {
                w *= (b[i] + added[i]) / (total + t as f64);
                added[i] += 1.0;
            }
            for &i in idx {
                added[i] = 0.0;
            }
            if w > 0.0 {
                let class = TupleClass::new_unchecked(idx.iter().map(|&i| points[i].clone()).collect());
                pairs.push((class, w));
            }
        });
        TupleMeasure::from_pairs(self.model.space(), m, pairs)
    }

    /// Posterior mean of `∫ g dp`, equal to the mean of `g` under the
    /// one-step predictive.
    pub fn bayes_estimator(&self, g: impl Fn(&Point) -> f64) -> f64 {
        self.predictive_one().expect(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FiniteDirichlet,
    DirichletProcess,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    StandardNormal,
    /// Uniform on `k` labels under the discrete metric.
    UniformLabels,
}

/// Flat `key = value` model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Number of labels (finite Dirichlet, or a process on labels).
    pub k: usize,
    /// Symmetric concentration used when `concentration` is absent.
    pub a: f64,
    pub concentration: Option<Vec<f64>>,
    pub alpha: f64,
    pub base: BaseKind,
    pub truncation: usize,
    pub residual_bound: f64,
    pub base_atoms: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::FiniteDirichlet,
            k: 3,
            a: 1.0,
            concentration: None,
            alpha: 1.0,
            base: BaseKind::StandardNormal,
            truncation: dp::DEFAULT_TRUNCATION,
            residual_bound: dp::DEFAULT_RESIDUAL_BOUND,
            base_atoms: dp::DEFAULT_BASE_ATOMS,
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<ExchangeableModel> {
        match self.kind {
            ModelKind::FiniteDirichlet => {
                let conc = self.concentration.clone().unwrap_or_else(|| vec![self.a; self.k]);
                if conc.len() != self.k {
                    return Err(Error::Config(format!(
                        "concentration has {} entries but k = {}",
                        conc.len(),
                        self.k
                    )));
                }
                Ok(ExchangeableModel::FiniteDirichlet(FiniteDirichletModel::new(
                    GroundSpace::discrete(self.k)?,
                    conc,
                )?))
            }
            ModelKind::DirichletProcess => {
                let base = match self.base {
                    BaseKind::StandardNormal => BaseMeasure::StandardNormal,
                    BaseKind::UniformLabels => {
                        let space = GroundSpace::discrete(self.k)?;
                        let labels: Vec<Point> = (0..self.k).map(Point::Label).collect();
                        BaseMeasure::Discrete(DiscreteMeasure::empirical(&labels, &space)?)
                    }
                };
                Ok(ExchangeableModel::DirichletProcess(
                    DpModel::new(base, self.alpha, self.truncation, self.residual_bound)?
                        .with_base_atoms(self.base_atoms)?,
                ))
            }
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
