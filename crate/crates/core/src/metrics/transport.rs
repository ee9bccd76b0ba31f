//! Exact solver for the transportation problem.
//!
//! Successive shortest paths on the dense bipartite residual graph, with node
//! potentials so Dijkstra runs on nonnegative reduced costs. The final
//! potentials are a dual solution, which [`TransportSolution::certify`] checks
//! against the primal plan (complementary slackness and zero duality gap).

use crate::error::{Error, Result};

/// Default cap on `rows * cols` for a transportation instance (200 x 200).
pub const DEFAULT_PAIR_BUDGET: usize = 40_000;

const MASS_EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub cost: f64,
    /// Nonzero entries `(row, col, mass)` of an optimal plan.
    pub plan: Vec<(usize, usize, f64)>,
    /// Dual variables `f_i`, `g_j` with `f_i + g_j <= c_ij`.
    pub row_dual: Vec<f64>,
    pub col_dual: Vec<f64>,
}

impl TransportSolution {
    pub fn dual_objective(&self, supply: &[f64], demand: &[f64]) -> f64 {
        let f: f64 = supply.iter().zip(&self.row_dual).map(|(a, u)| a * u).sum();
        let g: f64 = demand.iter().zip(&self.col_dual).map(|(b, v)| b * v).sum();
        f + g
    }

    /// Checks dual feasibility and the duality gap against `tol`.
    pub fn certify(&self, supply: &[f64], demand: &[f64], cost: &[f64], tol: f64) -> bool {
        let n = demand.len();
        let feasible = self.row_dual.iter().enumerate().all(|(i, u)| {
            self.col_dual
                .iter()
                .enumerate()
                .all(|(j, v)| u + v <= cost[i * n + j] + tol)
        });
        let slack = self
            .plan
            .iter()
            .all(|&(i, j, _)| (self.row_dual[i] + self.col_dual[j] - cost[i * n + j]).abs() <= tol);
        feasible && slack && (self.dual_objective(supply, demand) - self.cost).abs() <= tol
    }
}

/// Minimizes `Σ x_ij c_ij` over plans with row sums `supply` and column sums
/// `demand`. `cost` is row-major `supply.len() x demand.len()`.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    solve_with_budget(supply, demand, cost, DEFAULT_PAIR_BUDGET)
}

pub fn solve_with_budget(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
    budget: usize,
) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::invalid("transportation problem with an empty side"));
    }
    if m.saturating_mul(n) > budget {
        return Err(Error::ResourceLimit {
            what: "transport pairs",
            requested: m * n,
            limit: budget,
        });
    }
    if cost.len() != m * n {
        return Err(Error::invalid("cost matrix has the wrong shape"));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("cost matrix has non-finite entries"));
    }
    let (sa, sb): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (sa - sb).abs() > 1e-9 {
        return Err(Error::invalid(format!("supply {sa} and demand {sb} differ")));
    }

    let mut excess = supply.to_vec();
    let mut deficit: Vec<f64> = demand.iter().map(|b| b * sa / sb).collect();
    let mut flow = vec![0.0; m * n];
    let mut pot_row = vec![0.0; m];
    let mut pot_col = vec![0.0; n];

    let mut dist_row = vec![0.0; m];
    let mut dist_col = vec![0.0; n];
    let mut done_row = vec![false; m];
    let mut done_col = vec![false; n];
    // Predecessor of a column is a row (forward arc); of a row, a column (reverse arc).
    let mut pred_col = vec![usize::MAX; n];
    let mut pred_row = vec![usize::MAX; m];

    loop {
        if !excess.iter().any(|&e| e > MASS_EPS) || !deficit.iter().any(|&d| d > MASS_EPS) {
            break;
        }

        for i in 0..m {
            dist_row[i] = if excess[i] > MASS_EPS { 0.0 } else { f64::INFINITY };
            done_row[i] = false;
            pred_row[i] = usize::MAX;
        }
        for j in 0..n {
            dist_col[j] = f64::INFINITY;
            done_col[j] = false;
            pred_col[j] = usize::MAX;
        }

        // Dense Dijkstra over rows and columns.
        loop {
            let mut best = f64::INFINITY;
            let mut pick: Option<(bool, usize)> = None;
            for i in 0..m {
                if !done_row[i] && dist_row[i] < best {
                    best = dist_row[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..n {
                if !done_col[j] && dist_col[j] < best {
                    best = dist_col[j];
                    pick = Some((false, j));
                }
            }
            let Some((is_row, k)) = pick else { break };
            if is_row {
                done_row[k] = true;
                let base = dist_row[k] + pot_row[k];
                let row = &cost[k * n..(k + 1) * n];
                for j in 0..n {
                    if done_col[j] {
                        continue;
                    }
                    let nd = base + row[j] - pot_col[j];
                    if nd < dist_col[j] {
                        dist_col[j] = nd;
                        pred_col[j] = k;
                    }
                }
            } else {
                done_col[k] = true;
                let base = dist_col[k] + pot_col[k];
                for i in 0..m {
                    if done_row[i] || excess[i] > MASS_EPS || flow[i * n + k] <= MASS_EPS {
                        continue;
                    }
                    let nd = base - cost[i * n + k] - pot_row[i];
                    if nd < dist_row[i] {
                        dist_row[i] = nd;
                        pred_row[i] = k;
                    }
                }
            }
        }

        // Deficit column with the smallest true distance from the source.
        let mut target = None;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if deficit[j] > MASS_EPS && dist_col[j].is_finite() {
                let true_dist = dist_col[j] + pot_col[j];
                if true_dist < best {
                    best = true_dist;
                    target = Some(j);
                }
            }
        }
        let Some(target) = target else {
            return Err(Error::invalid("transport solver found no augmenting path"));
        };

        for i in 0..m {
            if dist_row[i].is_finite() {
                pot_row[i] += dist_row[i];
            }
        }
        for j in 0..n {
            if dist_col[j].is_finite() {
                pot_col[j] += dist_col[j];
            }
        }

        // Walk back to the source row and find the bottleneck.
        let mut amount = deficit[target];
        let mut j = target;
        let source_row = loop {
            let i = pred_col[j];
            let back = pred_row[i];
            if back == usize::MAX {
                break i;
            }
            amount = amount.min(flow[i * n + back]);
            j = back;
        };
        amount = amount.min(excess[source_row]);

        let mut j = target;
        loop {
            let i = pred_col[j];
            flow[i * n + j] += amount;
            let back = pred_row[i];
            if back == usize::MAX {
                break;
            }
            flow[i * n + back] -= amount;
            if flow[i * n + back] < 0.0 {
                flow[i * n + back] = 0.0;
            }
            j = back;
        }
        excess[source_row] -= amount;
        deficit[target] -= amount;
    }

    let mut plan = Vec::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let x = flow[i * n + j];
            if x > MASS_EPS {
                plan.push((i, j, x));
                total += x * cost[i * n + j];
            }
        }
    }
    Ok(TransportSolution {
        cost: total,
        plan,
        row_dual: pot_row.iter().map(|p| -p).collect(),
        col_dual: pot_col,
    })
}
