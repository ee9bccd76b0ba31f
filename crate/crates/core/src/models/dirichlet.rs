//! Finite Dirichlet prior on the simplex over K labels.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::measures::GroundSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDirichletModel {
    space: GroundSpace,
    concentration: Vec<f64>,
}

impl FiniteDirichletModel {
    pub fn new(space: GroundSpace, concentration: Vec<f64>) -> Result<Self> {
        let Some(f) = space.as_finite() else {
            return Err(Error::invalid("finite Dirichlet needs a finite labelled space"));
        };
        if f.len() < 2 {
            return Err(Error::invalid("finite Dirichlet needs at least two labels"));
        }
        if concentration.len() != f.len() {
            return Err(Error::invalid(format!(
                "{} concentration values for {} labels",
                concentration.len(),
                f.len()
            )));
        }
        if concentration.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::invalid("concentration values must be positive"));
        }
        Ok(Self { space, concentration })
    }

    /// Dirichlet(a, ..., a) on `k` labels under the discrete metric.
    pub fn symmetric(k: usize, a: f64) -> Result<Self> {
        Self::new(GroundSpace::discrete(k)?, vec![a; k])
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    pub fn k(&self) -> usize {
        self.concentration.len()
    }
}

/// One draw from Dirichlet(shapes) by normalizing independent Gamma(a_j, 1)
/// variables.
pub fn dirichlet_draw<R: Rng + ?Sized>(shapes: &[f64], rng: &mut R) -> Vec<f64> {
    let gammas: Vec<Gamma<f64>> = shapes
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("shape validated positive"))
        .collect();
    loop {
        let mut g: Vec<f64> = gammas.iter().map(|d| d.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        // Every gamma underflowing at once needs all shapes far below 1e-3.
        if total > 0.0 && total.is_finite() {
            g.iter_mut().for_each(|x| *x /= total);
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(FiniteDirichletModel::symmetric(1, 1.0).is_err());
        assert!(FiniteDirichletModel::symmetric(3, 0.0).is_err());
        assert!(FiniteDirichletModel::new(GroundSpace::discrete(3).unwrap(), vec![1.0, 1.0]).is_err());
        assert!(FiniteDirichletModel::new(GroundSpace::RealLine, vec![1.0, 1.0]).is_err());
        assert_eq!(FiniteDirichletModel::symmetric(4, 0.5).unwrap().k(), 4);
    }

    #[test]
    fn draw_mean_and_variance() {
        let shapes = [1.0, 2.0, 5.0];
        let a0: f64 = shapes.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 20_000;
        let mut sum = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let p = dirichlet_draw(&shapes, &mut rng);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for j in 0..3 {
                sum[j] += p[j];
                sq[j] += p[j] * p[j];
            }
        }
        for j in 0..3 {
            let mean = shapes[j] / a0;
            let var = mean * (1.0 - mean) / (a0 + 1.0);
            let got = sum[j] / n as f64;
            assert!((got - mean).abs() < 4.0 * (var / n as f64).sqrt());
            let got_var = sq[j] / n as f64 - got * got;
            assert!((got_var - var).abs() < 0.1 * var);
        }
    }
}
