//! Randomized cross-checks of the metric solvers against slower independent
//! routes, as run by `exmerge oracle-check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::measures::{DiscreteMeasure, GroundSpace, Point};
use crate::metrics::transport;
use crate::metrics::{fortet_mourier, ot_cost, prokhorov, prokhorov_bruteforce, w1_real};

pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub name: &'static str,
    pub cases: usize,
    /// Worst disagreement (or violation, for inequalities).
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Measure with `1..=max_atoms` distinct atoms drawn from `atoms` and
/// positive random weights.
pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, space: &GroundSpace, atoms: &[Point], max_atoms: usize) -> DiscreteMeasure {
    let count = rng.random_range(1..=max_atoms.min(atoms.len()));
    let mut idx: Vec<usize> = (0..atoms.len()).collect();
    for i in 0..count {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    let w: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let pairs = idx[..count]
        .iter()
        .zip(&w)
        .map(|(&i, &x)| (atoms[i].clone(), x / total))
        .collect();
    DiscreteMeasure::from_pairs(space.clone(), pairs).expect("weights are normalized")
}

/// `k` labels at random points of the unit square, with Euclidean distances.
pub fn random_finite_space<R: Rng + ?Sized>(rng: &mut R, k: usize) -> GroundSpace {
    loop {
        let pts: Vec<(f64, f64)> = (0..k).map(|_| (rng.random(), rng.random())).collect();
        let matrix = (0..k * k)
            .map(|idx| {
                let (a, b) = (pts[idx / k], pts[idx % k]);
                ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
            })
            .collect();
        if let Ok(space) = GroundSpace::finite((0..k).map(|i| format!("s{i}")).collect(), matrix) {
            return space;
        }
    }
}

/// Real atoms on a coarse grid, so that measures share atoms and distances
/// tie often.
pub fn real_grid<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Point> {
    let mut xs: Vec<i64> = Vec::new();
    while xs.len() < count {
        let x = rng.random_range(-20..=20);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.into_iter().map(|x| Point::real(x as f64 / 8.0)).collect()
}

struct Tally {
    name: &'static str,
    cases: usize,
    worst: f64,
    tolerance: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            worst: 0.0,
            tolerance,
        }
    }

    fn add(&mut self, err: f64) {
        self.cases += 1;
        self.worst = if err.is_nan() { f64::INFINITY } else { self.worst.max(err) };
    }

    fn finish(self) -> OracleResult {
        OracleResult {
            name: self.name,
            cases: self.cases,
            max_error: self.worst,
            tolerance: self.tolerance,
            pass: self.worst <= self.tolerance,
        }
    }
}

/// Runs `pairs` random cases of every check.
pub fn run_oracle_checks(seed: u64, pairs: usize) -> Result<Vec<OracleResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prok = Tally::new("prokhorov = brute force", ORACLE_TOLERANCE);
    let mut w1 = Tally::new("w1_real = transport (p = 1)", ORACLE_TOLERANCE);
    let mut cert = Tally::new("transport duality gap", ORACLE_TOLERANCE);
    let mut chain_p = Tally::new("prokhorov <= (1.5 fm)^(1/2)", ORACLE_TOLERANCE);
    let mut chain_fm = Tally::new("fm <= w1", ORACLE_TOLERANCE);
    for case in 0..pairs {
        let (space, atoms) = if case % 2 == 0 {
            let k = rng.random_range(2..=8);
            let space = random_finite_space(&mut rng, k);
            (space, (0..k).map(Point::Label).collect::<Vec<_>>())
        } else {
            (GroundSpace::RealLine, real_grid(&mut rng, 10))
        };
        let mu = random_measure(&mut rng, &space, &atoms, 8);
        let nu = random_measure(&mut rng, &space, &atoms, 8);
        let p = prokhorov(&mu, &nu)?;
        prok.add((p - prokhorov_bruteforce(&mu, &nu)?).abs());
        let ot = ot_cost(&mu, &nu, 1.0)?;
        if space.is_real_line() {
            w1.add((w1_real(&mu, &nu)? - ot).abs());
        }
        let cost: Vec<f64> = mu
            .atoms()
            .iter()
            .flat_map(|x| nu.atoms().iter().map(|y| space.distance(x, y)))
            .collect();
        let sol = transport::solve(mu.weights(), nu.weights(), &cost)?;
        cert.add(if sol.certify(mu.weights(), nu.weights(), &cost, ORACLE_TOLERANCE) {
            (sol.dual_objective(mu.weights(), nu.weights()) - sol.cost).abs()
        } else {
            f64::INFINITY
        });
        let fm = fortet_mourier(&mu, &nu)?;
        chain_p.add((p - (1.5 * fm).sqrt()).max(0.0));
        chain_fm.add((fm - ot).max(0.0));
    }
    Ok([prok, w1, cert, chain_p, chain_fm].into_iter().map(Tally::finish).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let res = run_oracle_checks(3, 40).unwrap();
        assert_eq!(res.len(), 5);
        for r in &res {
            assert!(r.pass, "{r:?}");
            assert!(r.cases > 0);
        }
    }
}
