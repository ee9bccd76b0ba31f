//! Prokhorov distance between finite-support measures.
//!
//! `d_P(μ, ν) <= ε` exactly when some coupling puts mass at least `1 - ε` on
//! pairs at distance `<= ε`. The largest such mass is a bipartite max flow
//! `F(ε)`, a step function that only moves at the pairwise distances. With the
//! distinct distances `v_0 < v_1 < ...` the distance is
//! `min_k max(v_k, 1 - F(v_k))`, located by binary search on `k`.

use super::flow::bipartite_max_flow;
use super::transport::DEFAULT_PAIR_BUDGET;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Largest support accepted by [`prokhorov_bruteforce`].
pub const BRUTEFORCE_MAX_ATOMS: usize = 15;

pub fn prokhorov(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let d = cross_distances(mu, nu)?;
    prokhorov_from_matrix(mu.weights(), nu.weights(), &d, DEFAULT_PAIR_BUDGET)
}

pub(crate) fn cross_distances(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Vec<f64>> {
    if mu.space() != nu.space() {
        return Err(Error::invalid("measures live on different spaces"));
    }
    let space = mu.space();
    let mut d = Vec::with_capacity(mu.len() * nu.len());
    for x in mu.atoms() {
        for y in nu.atoms() {
            d.push(space.distance(x, y));
        }
    }
    Ok(d)
}

/// Prokhorov distance for weights `a`, `b` with ground distances `d`
/// (row-major `a.len() x b.len()`).
pub fn prokhorov_from_matrix(a: &[f64], b: &[f64], d: &[f64], budget: usize) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    if m.saturating_mul(n) > budget {
        return Err(Error::ResourceLimit {
            what: "prokhorov pairs",
            requested: m * n,
            limit: budget,
        });
    }
    if d.len() != m * n {
        return Err(Error::invalid("distance matrix has the wrong shape"));
    }
    let mut levels: Vec<f64> = d.iter().copied().filter(|&v| v <= 1.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.is_empty() {
        return Ok(1.0);
    }
    let flow_at = |eps: f64| bipartite_max_flow(a, b, |i, j| d[i * n + j] <= eps);

    // First level where the closed ε-neighbourhood coupling is feasible.
    let (mut lo, mut hi) = (0usize, levels.len());
    let mut flow_below: Option<f64> = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let f = flow_at(levels[mid]);
        if levels[mid] >= 1.0 - f {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    if k > 0 {
        flow_below = Some(flow_at(levels[k - 1]));
    }
    let mut best: f64 = 1.0;
    if k < levels.len() {
        best = best.min(levels[k]);
    }
    if let Some(f) = flow_below {
        best = best.min(1.0 - f);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Prokhorov distance from the subset definition: for every `B ⊆ supp(μ)` the
/// least ε with `μ(B) <= ν(B^ε) + ε`, maximized over `B` and over both
/// orientations.
pub fn prokhorov_bruteforce(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let forward = prokhorov_bruteforce_oriented(mu, nu)?;
    let backward = prokhorov_bruteforce_oriented(nu, mu)?;
    Ok(forward.max(backward))
}

pub fn prokhorov_bruteforce_oriented(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if mu.len() > BRUTEFORCE_MAX_ATOMS {
        return Err(Error::ResourceLimit {
            what: "brute-force prokhorov atoms",
            requested: mu.len(),
            limit: BRUTEFORCE_MAX_ATOMS,
        });
    }
    let d = cross_distances(mu, nu)?;
    let (k, n) = (mu.len(), nu.len());
    let mut worst: f64 = 0.0;
    let mut to_set = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for mask in 1u32..(1 << k) {
        let mass_b: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| mu.weights()[i]).sum();
        for (j, slot) in to_set.iter_mut().enumerate() {
            *slot = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| d[i * n + j])
                .fold(f64::INFINITY, f64::min);
        }
        order.sort_by(|&x, &y| to_set[x].total_cmp(&to_set[y]));
        // ε in [0, first level): no ν mass within reach unless at distance 0.
        let mut eps_b = f64::INFINITY;
        let mut reached = 0.0;
        let mut idx = 0;
        let mut level = 0.0;
        loop {
            while idx < n && to_set[order[idx]] <= level {
                reached += nu.weights()[order[idx]];
                idx += 1;
            }
            // Gaps at rounding level are sums of the same weights in another order.
            let gap = mass_b - reached;
            eps_b = eps_b.min(level.max(if gap <= 1e-14 { 0.0 } else { gap }));
            if idx == n {
                break;
            }
            level = to_set[order[idx]];
        }
        worst = worst.max(eps_b.clamp(0.0, 1.0));
    }
    Ok(worst)
}

/// Shortcut for measures on a common finite support: when half the ℓ1 gap is
/// below the smallest distance between distinct atoms, the Prokhorov distance
/// equals that half gap. Returns `None` when the condition fails.
pub fn prokhorov_separated(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Option<f64> {
    if mu.space() != nu.space() {
        return None;
    }
    let space = mu.space();
    let mut union: Vec<_> = mu.atoms().iter().chain(nu.atoms()).cloned().collect();
    union.sort();
    union.dedup();
    let half_gap = 0.5
        * union
            .iter()
            .map(|p| (mu.mass_at(p) - nu.mass_at(p)).abs())
            .sum::<f64>();
    let mut min_sep = f64::INFINITY;
    for (i, x) in union.iter().enumerate() {
        for y in &union[i + 1..] {
            min_sep = min_sep.min(space.distance(x, y));
        }
    }
    (half_gap < min_sep).then_some(half_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{GroundSpace, Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real_measure(rng: &mut ChaCha8Rng, k: usize, spread: f64) -> DiscreteMeasure {
        let pairs = (0..k)
            .map(|_| (Point::real(rng.random_range(0.0..spread)), rng.random_range(0.05..1.0)))
            .collect::<Vec<_>>();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let pairs = pairs.into_iter().map(|(p, w)| (p, w / total)).collect();
        DiscreteMeasure::from_pairs(GroundSpace::RealLine, pairs).unwrap()
    }

    #[test]
    fn diracs() {
        for (x, y) in [(0.0, 0.3), (0.0, 1.0), (2.0, -3.0), (1.0, 1.0)] {
            let a = DiscreteMeasure::dirac(GroundSpace::RealLine, Point::real(x)).unwrap();
            let b = DiscreteMeasure::dirac(GroundSpace::RealLine, Point::real(y)).unwrap();
            let want = (x - y).abs().min(1.0);
            assert!((prokhorov(&a, &b).unwrap() - want).abs() < 1e-12);
            assert!((prokhorov_bruteforce(&a, &b).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_measures_are_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = real_measure(&mut rng, 6, 3.0);
        assert_eq!(prokhorov(&mu, &mu).unwrap(), 0.0);
        assert_eq!(prokhorov_bruteforce(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn total_variation_when_atoms_are_separated() {
        let space = GroundSpace::finite(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 0.8, 0.9, 0.8, 0.0, 0.7, 0.9, 0.7, 0.0],
        )
        .unwrap();
        let mu = DiscreteMeasure::new(space.clone(), vec![Point::Label(0), Point::Label(1), Point::Label(2)], vec![0.5, 0.3, 0.2]).unwrap();
        let nu = DiscreteMeasure::new(space, vec![Point::Label(0), Point::Label(1), Point::Label(2)], vec![0.3, 0.4, 0.3]).unwrap();
        let tv = 0.5 * (0.2 + 0.1 + 0.1);
        assert!((prokhorov(&mu, &nu).unwrap() - tv).abs() < 1e-12);
        assert!((prokhorov_separated(&mu, &nu).unwrap() - tv).abs() < 1e-12);
    }

    #[test]
    fn flow_route_matches_subset_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..300 {
            let spread = [0.5, 1.5, 4.0][trial % 3];
            let mu = real_measure(&mut rng, 1 + trial % 8, spread);
            let nu = real_measure(&mut rng, 1 + (trial / 3) % 8, spread);
            let fast = prokhorov(&mu, &nu).unwrap();
            let slow = prokhorov_bruteforce(&mu, &nu).unwrap();
            assert!((fast - slow).abs() <= 1e-9, "trial {trial}: {fast} vs {slow}");
            let other = prokhorov_bruteforce_oriented(&nu, &mu).unwrap();
            assert!((other - slow).abs() <= 1e-9);
        }
    }

    #[test]
    fn bruteforce_size_limit() {
        let pts: Vec<Point> = (0..16).map(|i| Point::real(i as f64)).collect();
        let mu = DiscreteMeasure::empirical(&pts, &GroundSpace::RealLine).unwrap();
        assert!(matches!(prokhorov_bruteforce(&mu, &mu), Err(Error::ResourceLimit { .. })));
    }
}
