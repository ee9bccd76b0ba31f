//! Fortet–Mourier (bounded Lipschitz) distance
//! `sup { ∫h dμ - ∫h dν : ‖h‖_∞ + ‖h‖_Lip <= 1 }`.
//!
//! On a finite union support any feasible `h` extends to the whole space with
//! the same sup and Lipschitz constants (McShane extension, then clamping), so
//! the supremum is the linear program over the values `h(x)`, a sup level `s`
//! and a slope `L`:
//!
//! ```text
//! max Σ h_x (μ_x - ν_x)   s.t.  |h_x| <= s,  h_x - h_y <= L d(x, y),  s + L <= 1.
//! ```

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Default cap on the union support size (the LP has about `n^2` rows).
pub const FM_MAX_SUPPORT: usize = 60;

pub fn fortet_mourier(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    fortet_mourier_with_budget(mu, nu, FM_MAX_SUPPORT)
}

pub fn fortet_mourier_with_budget(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    max_support: usize,
) -> Result<f64> {
    if mu.space() != nu.space() {
        return Err(Error::invalid("measures live on different spaces"));
    }
    let mut union: Vec<_> = mu.atoms().iter().chain(nu.atoms()).cloned().collect();
    union.sort();
    union.dedup();
    if union.len() > max_support {
        return Err(Error::ResourceLimit {
            what: "fortet-mourier union support",
            requested: union.len(),
            limit: max_support,
        });
    }
    let diff: Vec<f64> = union.iter().map(|x| mu.mass_at(x) - nu.mass_at(x)).collect();
    if diff.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let space = mu.space();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let h: Vec<_> = diff.iter().map(|&c| lp.add_var(c, (-1.0, 1.0))).collect();
    let s = lp.add_var(0.0, (0.0, 1.0));
    let slope = lp.add_var(0.0, (0.0, 1.0));
    lp.add_constraint(&[(s, 1.0), (slope, 1.0)], ComparisonOp::Le, 1.0);
    for &hx in &h {
        lp.add_constraint(&[(hx, 1.0), (s, -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint(&[(hx, -1.0), (s, -1.0)], ComparisonOp::Le, 0.0);
    }
    for (i, x) in union.iter().enumerate() {
        for (j, y) in union.iter().enumerate() {
            if i != j {
                let d = space.distance(x, y);
                lp.add_constraint(&[(h[i], 1.0), (h[j], -1.0), (slope, -d)], ComparisonOp::Le, 0.0);
            }
        }
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::invalid(format!("fortet-mourier LP failed: {e}")))?
        .into_solution()
        .map_err(|_| Error::invalid("fortet-mourier LP was interrupted"))?;
    Ok(solution.objective().max(0.0))
}
