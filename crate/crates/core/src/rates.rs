//! Rate sequences and the right-hand sides of the merging bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, GroundSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `√(n / log log n)`
    SqrtNOverLoglog,
    /// `(n / log n)^{1/4}`
    NOverLogQuarter,
    /// `(n / log n)^{1/8}`
    NOverLogEighth,
}

pub const MIN_SCHEDULE_N: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSchedule {
    pub kind: RateKind,
    pub n_min: u64,
}

impl RateSchedule {
    pub fn new(kind: RateKind, n_min: u64) -> Result<Self> {
        if n_min < MIN_SCHEDULE_N {
            return Err(Error::invalid(format!("rate schedule needs n_min >= {MIN_SCHEDULE_N}, got {n_min}")));
        }
        Ok(Self { kind, n_min })
    }

    /// `b_n`, defined for `n >= n_min`.
    pub fn rate(&self, n: u64) -> Result<f64> {
        if n < self.n_min {
            return Err(Error::invalid(format!("n = {n} is below the schedule start {}", self.n_min)));
        }
        Ok(self.kind.eval(n as f64))
    }
}

impl RateKind {
    /// The formula itself, without the domain check.
    pub fn eval(self, n: f64) -> f64 {
        match self {
            RateKind::SqrtNOverLoglog => (n / n.ln().ln()).sqrt(),
            RateKind::NOverLogQuarter => (n / n.ln()).powf(0.25),
            RateKind::NOverLogEighth => (n / n.ln()).powf(0.125),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RateKind::SqrtNOverLoglog => "sqrt(n/loglog n)",
            RateKind::NOverLogQuarter => "(n/log n)^(1/4)",
            RateKind::NOverLogEighth => "(n/log n)^(1/8)",
        }
    }
}

/// A bound value with its provenance, as written to reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub constant_name: String,
    pub value: f64,
    /// Whether the bound depends on the realized directing measure.
    pub per_replicate: bool,
    pub detail: String,
}

/// `∫ √(2F(1-F)) dx` for the step CDF of a finite measure on the line. The
/// integrand is constant between atoms, so the integral is the sum of
/// `gap · √(2F(1-F))` over consecutive atoms.
pub fn gini_bound(mu: &DiscreteMeasure) -> Result<f64> {
    let atoms = mu.real_atoms()?;
    let mut f = 0.0;
    let mut total = 0.0;
    for pair in atoms.windows(2) {
        f += pair[0].1;
        let g = f.min(1.0);
        total += (pair[1].0 - pair[0].0) * (2.0 * g * (1.0 - g)).max(0.0).sqrt();
    }
    Ok(total)
}

/// Trapezoid rule for `∫ √(2F(1-F)) dx` over `[lo, hi]` with step `h`, for
/// a CDF given as a function. Fails with a warning when the integrand has not
/// decayed at the ends of the range.
pub fn gini_bound_numeric(cdf: impl Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> Result<f64> {
    if !(hi > lo) || !(h > 0.0) {
        return Err(Error::invalid("quadrature needs lo < hi and h > 0"));
    }
    let steps = ((hi - lo) / h).ceil() as usize;
    let step = (hi - lo) / steps as f64;
    let integrand = |x: f64| {
        let f = cdf(x).clamp(0.0, 1.0);
        (2.0 * f * (1.0 - f)).sqrt()
    };
    let mut total = 0.5 * (integrand(lo) + integrand(hi));
    let mut peak = integrand(lo).max(integrand(hi));
    for i in 1..steps {
        let v = integrand(lo + i as f64 * step);
        peak = peak.max(v);
        total += v;
    }
    total *= step;
    let edge = integrand(lo).max(integrand(hi));
    if edge > 1e-3 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::NumericalWarning {
            value: total,
            detail: format!("integrand is {edge:e} at the edge of [{lo}, {hi}] (h = {step})"),
        });
    }
    Ok(total)
}

/// `(8 ∫ [|x| + |x|^{2+ε}/(2+ε)] μ(dx))^{1/2}`.
pub fn moment_bound(mu: &DiscreteMeasure, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("moment exponent eps = {eps} must be positive")));
    }
    let atoms = mu.real_atoms()?;
    let m: f64 = atoms
        .iter()
        .map(|&(x, w)| w * (x.abs() + x.abs().powf(2.0 + eps) / (2.0 + eps)))
        .sum();
    Ok((8.0 * m).sqrt())
}

/// Value of the partition functional, with the per-stage sums it was taken
/// from.
#[derive(Clone, Debug, PartialEq)]
pub struct PiReport {
    pub value: f64,
    /// `(stage, Σ_j [p(A_j)(1 - p(A_j))]^{1/r})` along the partition sequence.
    pub stages: Vec<(usize, f64)>,
}

/// Stages used on `R^d` unless configured otherwise.
pub const DEFAULT_PI_STAGES: usize = 16;

fn pi_term(mass: f64, r: f64) -> f64 {
    (mass * (1.0 - mass)).max(0.0).powf(1.0 / r)
}

/// `liminf_m Σ_j [p(A_{m,j})(1 - p(A_{m,j}))]^{1/r}`.
///
/// On a finite space every partition eventually isolates the atoms, so the sum
/// is `Σ_j [p_j(1-p_j)]^{1/r}` exactly. On `R^d`, stage `m` uses the box
/// `[-2^m, 2^m)^d` cut into dyadic cubes of diameter at most `2^{-m}` plus its
/// complement, and the minimum over the second half of the stages is
/// returned. A sequence that has not settled by the last stage gives a warning
/// carrying that minimum.
pub fn pi_r(p: &DiscreteMeasure, r: f64, stages: usize) -> Result<PiReport> {
    if !(r > 2.0) || !r.is_finite() {
        return Err(Error::invalid(format!("pi_r needs r > 2, got {r}")));
    }
    if let GroundSpace::Finite(_) = p.space() {
        let value = p.weights().iter().map(|&w| pi_term(w, r)).sum();
        return Ok(PiReport { value, stages: Vec::new() });
    }
    if stages == 0 {
        return Err(Error::invalid("pi_r needs at least one stage"));
    }
    let dim = match p.space() {
        GroundSpace::Euclidean { dim } => *dim,
        _ => 1,
    };
    let sub = (dim as f64).sqrt().log2().ceil() as i32;
    let mut out = Vec::with_capacity(stages);
    for m in 1..=stages {
        let half = 2f64.powi(m as i32);
        let side = 2f64.powi(-(m as i32) - sub);
        let mut cells: Vec<(Vec<i64>, f64)> = Vec::new();
        let mut outside = 0.0;
        for (x, w) in p.iter() {
            let coords: Vec<f64> = match x {
                Point::Real(v) => vec![*v],
                Point::Vector(v) => v.clone(),
                Point::Label(_) => unreachable!("finite spaces handled above"),
            };
            if coords.iter().any(|&c| c < -half || c >= half) {
                outside += w;
            } else {
                cells.push((coords.iter().map(|&c| ((c + half) / side).floor() as i64).collect(), w));
            }
        }
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        let mut sum = pi_term(outside, r);
        let mut i = 0;
        while i < cells.len() {
            let mut mass = 0.0;
            let key = &cells[i].0;
            let mut j = i;
            while j < cells.len() && cells[j].0 == *key {
                mass += cells[j].1;
                j += 1;
            }
            sum += pi_term(mass, r);
            i = j;
        }
        out.push((m, sum));
    }
    // Coarse stages lump atoms together and can sit far below the limit, so
    // the liminf is read off the second half of the schedule.
    let value = out[out.len() / 2..].iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let settled = out.len() >= 2 && {
        let (a, b) = (out[out.len() - 2].1, out[out.len() - 1].1);
        (a - b).abs() <= 1e-12 * a.abs().max(1.0)
    };
    if !settled {
        let trail: Vec<String> = out.iter().map(|(m, s)| format!("{m}:{s:.6}")).collect();
        return Err(Error::NumericalWarning {
            value,
            detail: format!("partition sums still moving at the last stage ({})", trail.join(", ")),
        });
    }
    Ok(PiReport { value, stages: out })
}

/// Default trailing window, as a fraction of the horizon: `[n_hi/10, n_hi]`.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.1;

/// Largest value over the rows with `fraction · n_hi <= n <= n_hi`.
pub fn windowed_max(ns: &[u64], values: &[f64], fraction: f64) -> Result<f64> {
    if ns.len() != values.len() {
        return Err(Error::invalid("trajectory columns differ in length"));
    }
    let Some(&n_hi) = ns.last() else {
        return Err(Error::invalid("empty trajectory"));
    };
    let lo = fraction * n_hi as f64;
    ns.iter()
        .zip(values)
        .filter(|(&n, _)| n as f64 >= lo)
        .map(|(_, &v)| v)
        .reduce(f64::max)
        .ok_or_else(|| Error::invalid("no trajectory rows inside the window"))
}

/// Plug-in estimate of `Y(p̃) = (3/2 limsup √(n/log n) d_P(p̃, e_n))^{1/2}`,
/// with the limsup replaced by the max over the trailing window.
pub fn y_estimator(ns: &[u64], distances: &[f64], window_fraction: f64) -> Result<BoundReport> {
    let (Some(&first), Some(&last)) = (ns.first(), ns.last()) else {
        return Err(Error::invalid("empty trajectory"));
    };
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::invalid("window fraction must lie in (0, 1)"));
    }
    if first < 2 || (last as f64) < first as f64 / window_fraction {
        return Err(Error::invalid(format!(
            "trajectory from n = {first} to {last} is too short for the window [{window_fraction} n_hi, n_hi]"
        )));
    }
    let scaled: Vec<f64> = ns
        .iter()
        .zip(distances)
        .map(|(&n, &d)| (n as f64 / (n as f64).ln()).sqrt() * d)
        .collect();
    let top = windowed_max(ns, &scaled, window_fraction)?;
    Ok(BoundReport {
        constant_name: "Y".into(),
        value: (1.5 * top).sqrt(),
        per_replicate: true,
        detail: format!("max over n in [{}, {last}]", (window_fraction * last as f64).ceil()),
    })
}
