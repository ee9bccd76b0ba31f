//! Dirichlet process prior, drawn by truncated stick-breaking.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, GroundSpace, Point};

/// Base measure `P_0` of the process.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseMeasure {
    Discrete(DiscreteMeasure),
    /// Standard normal on the real line, sampled through its quantile
    /// function.
    StandardNormal,
}

pub const DEFAULT_TRUNCATION: usize = 200;
pub const DEFAULT_RESIDUAL_BOUND: f64 = 1e-10;
/// Quantile-grid size standing in for a continuous `P_0` in exact formulas.
pub const DEFAULT_BASE_ATOMS: usize = 2000;

#[derive(Clone, Debug)]
pub struct DpModel {
    base: BaseMeasure,
    alpha: f64,
    truncation: usize,
    base_atoms: usize,
    /// Cumulative weights of a discrete base, for inversion sampling.
    base_cdf: Vec<f64>,
}

impl PartialEq for DpModel {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.alpha == other.alpha
            && self.truncation == other.truncation
            && self.base_atoms == other.base_atoms
    }
}

/// Uniform draw in the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl DpModel {
    /// `residual_bound` caps the expected stick mass left after `truncation`
    /// breaks, `(α/(α+1))^T`.
    pub fn new(base: BaseMeasure, alpha: f64, truncation: usize, residual_bound: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("DP mass alpha = {alpha} must be positive")));
        }
        if truncation == 0 {
            return Err(Error::invalid("stick-breaking truncation must be positive"));
        }
        let residual = (alpha / (alpha + 1.0)).powi(truncation as i32);
        if residual > residual_bound {
            return Err(Error::Config(format!(
                "stick-breaking residual {residual:e} after {truncation} breaks exceeds the bound {residual_bound:e}"
            )));
        }
        let base_cdf = match &base {
            BaseMeasure::Discrete(mu) => mu
                .weights()
                .iter()
                .scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect(),
            BaseMeasure::StandardNormal => Vec::new(),
        };
        Ok(Self {
            base,
            alpha,
            truncation,
            base_atoms: DEFAULT_BASE_ATOMS,
            base_cdf,
        })
    }

    pub fn with_base_atoms(mut self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("base grid needs at least one atom"));
        }
        self.base_atoms = q;
        Ok(self)
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn base_atoms(&self) -> usize {
        self.base_atoms
    }

    /// Expected mass beyond the truncation, `(α/(α+1))^T`.
    pub fn residual_mean(&self) -> f64 {
        (self.alpha / (self.alpha + 1.0)).powi(self.truncation as i32)
    }

    pub fn space(&self) -> GroundSpace {
        match &self.base {
            BaseMeasure::Discrete(mu) => mu.space().clone(),
            BaseMeasure::StandardNormal => GroundSpace::RealLine,
        }
    }

    pub fn sample_base<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.base {
            BaseMeasure::Discrete(mu) => {
                let u = open_unit(rng) * self.base_cdf.last().copied().unwrap_or(1.0);
                let i = self.base_cdf.partition_point(|&c| c < u).min(mu.len() - 1);
                mu.atoms()[i].clone()
            }
            BaseMeasure::StandardNormal => Point::real(standard_normal().inverse_cdf(open_unit(rng))),
        }
    }

    /// `P_0` as a finite measure: itself when discrete, otherwise the
    /// midpoint quantile grid `Φ^{-1}((i + 1/2)/Q)` with equal weights.
    pub fn base_representation(&self) -> DiscreteMeasure {
        match &self.base {
            BaseMeasure::Discrete(mu) => mu.clone(),
            BaseMeasure::StandardNormal => {
                let normal = standard_normal();
                let q = self.base_atoms;
                let pts: Vec<Point> = (0..q)
                    .map(|i| Point::real(normal.inverse_cdf((i as f64 + 0.5) / q as f64)))
                    .collect();
                DiscreteMeasure::empirical(&pts, &GroundSpace::RealLine).expect("nonempty grid")
            }
        }
    }

    /// Stick-breaking pieces `(atom, weight)` of one draw from `DP(α, P_0)`;
    /// the mass left after the last break goes to one more base draw.
    pub fn stick_breaking<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(Point, f64)> {
        let beta = Beta::new(1.0, self.alpha).expect("alpha validated positive");
        let mut pieces = Vec::with_capacity(self.truncation + 1);
        let mut remaining = 1.0;
        for _ in 0..self.truncation {
            let v: f64 = beta.sample(rng);
            pieces.push((self.sample_base(rng), remaining * v));
            remaining *= 1.0 - v;
        }
        pieces.push((self.sample_base(rng), remaining));
        pieces
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteMeasure {
        DiscreteMeasure::from_pairs(self.space(), self.stick_breaking(rng)).expect("stick weights sum to one")
    }
}
