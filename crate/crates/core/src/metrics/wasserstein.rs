use super::prokhorov::cross_distances;
use super::transport::{self, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Order-1 transport distance on the real line, `∫ |F_μ - F_ν| dx`, evaluated
/// exactly on the merged atom grid.
pub fn w1_real(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let a = mu.real_atoms()?;
    let b = nu.real_atoms()?;
    Ok(w1_sorted(&a, &b))
}

/// Same as [`w1_real`] on sorted `(atom, weight)` lists.
pub(crate) fn w1_sorted(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        if let Some(px) = prev {
            total += (fa - fb).abs() * (x - px);
        }
        while i < a.len() && a[i].0 == x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb += b[j].1;
            j += 1;
        }
        prev = Some(x);
    }
    total
}

/// Order-`p` optimal transport distance `(min_γ Σ γ_ij d(x_i, y_j)^p)^{1/p}`.
pub fn ot_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    ot_cost_with_budget(mu, nu, p, DEFAULT_PAIR_BUDGET)
}

pub fn ot_cost_with_budget(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    budget: usize,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("transport order p = {p} must be a real >= 1")));
    }
    if mu.len().saturating_mul(nu.len()) > budget {
        return Err(Error::ResourceLimit {
            what: "transport pairs",
            requested: mu.len() * nu.len(),
            limit: budget,
        });
    }
    let mut cost = cross_distances(mu, nu)?;
    if p != 1.0 {
        cost.iter_mut().for_each(|c| *c = c.powf(p));
    }
    let sol = transport::solve_with_budget(mu.weights(), nu.weights(), &cost, budget)?;
    Ok(sol.cost.max(0.0).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{GroundSpace, Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dirac(x: f64) -> DiscreteMeasure {
        DiscreteMeasure::dirac(GroundSpace::RealLine, Point::real(x)).unwrap()
    }

    fn uniform(points: &[f64]) -> DiscreteMeasure {
        let pts: Vec<Point> = points.iter().map(|&x| Point::real(x)).collect();
        DiscreteMeasure::empirical(&pts, &GroundSpace::RealLine).unwrap()
    }

    /// Best assignment by enumerating all permutations.
    fn best_assignment(x: &[f64], y: &[f64], p: f64) -> f64 {
        fn rec(x: &[f64], y: &[f64], used: &mut Vec<bool>, k: usize, acc: f64, p: f64, best: &mut f64) {
            if k == x.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..y.len() {
                if !used[j] {
                    used[j] = true;
                    rec(x, y, used, k + 1, acc + (x[k] - y[j]).abs().powf(p), p, best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(x, y, &mut vec![false; y.len()], 0, 0.0, p, &mut best);
        (best / x.len() as f64).powf(1.0 / p)
    }

    #[test]
    fn dirac_pairs() {
        assert!((w1_real(&dirac(0.0), &dirac(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((ot_cost(&dirac(0.0), &dirac(-2.5), 2.0).unwrap() - 2.5).abs() < 1e-12);
        let mu = uniform(&[0.0, 1.0, 3.0]);
        assert_eq!(w1_real(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn equal_weight_optimum_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [1.0, 1.5, 2.0] {
            for _ in 0..40 {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let got = ot_cost(&uniform(&x), &uniform(&y), p).unwrap();
                assert!((got - best_assignment(&x, &y, p)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cdf_formula_matches_transport() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mk = |rng: &mut ChaCha8Rng| {
                let pairs: Vec<(Point, f64)> = (0..6)
                    .map(|_| (Point::real(rng.random_range(-3.0..3.0)), rng.random_range(0.05..1.0)))
                    .collect();
                let s: f64 = pairs.iter().map(|p| p.1).sum();
                DiscreteMeasure::from_pairs(GroundSpace::RealLine, pairs.into_iter().map(|(p, w)| (p, w / s)).collect()).unwrap()
            };
            let (mu, nu) = (mk(&mut rng), mk(&mut rng));
            assert!((w1_real(&mu, &nu).unwrap() - ot_cost(&mu, &nu, 1.0).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ot_cost(&dirac(0.0), &dirac(1.0), 0.5).is_err());
        let s = GroundSpace::discrete(2).unwrap();
        let lab = DiscreteMeasure::dirac(s, Point::Label(0)).unwrap();
        assert!(w1_real(&lab, &lab).is_err());
        assert!(ot_cost(&lab, &dirac(0.0), 1.0).is_err());
        let big = uniform(&(0..201).map(|i| i as f64).collect::<Vec<_>>());
        assert!(matches!(ot_cost(&big, &big, 1.0), Err(Error::ResourceLimit { .. })));
    }
}
