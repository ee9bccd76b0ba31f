//! Trajectories and the finitary statistics computed from them.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub n: u64,
    pub raw: f64,
    /// `b_n · raw`.
    pub normalized: f64,
    /// Values of the report's extra columns, in order.
    pub extra: Vec<Option<f64>>,
}

/// One tracked distance along the schedule for one replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub series: String,
    pub replicate: usize,
    pub rows: Vec<Row>,
    /// Per-replicate bound values, keyed by the report's bound columns.
    pub bounds: Vec<(String, f64)>,
}

impl Trajectory {
    pub fn new(series: impl Into<String>, replicate: usize, rows: Vec<Row>, bounds: Vec<(String, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("trajectory has no rows"));
        }
        if rows.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::invalid("trajectory n values must increase strictly"));
        }
        for r in &rows {
            if !(r.raw >= 0.0 && r.raw.is_finite() && r.normalized >= 0.0 && r.normalized.is_finite()) {
                return Err(Error::NumericalWarning {
                    value: r.raw,
                    detail: format!("distance at n = {} is negative or not finite", r.n),
                });
            }
        }
        Ok(Self {
            series: series.into(),
            replicate,
            rows,
            bounds,
        })
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn ns(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.n).collect()
    }

    /// Largest normalized value with `lo <= n <= hi`.
    pub fn window_max(&self, window: (u64, u64)) -> Result<f64> {
        self.rows
            .iter()
            .filter(|r| r.n >= window.0 && r.n <= window.1)
            .map(|r| r.normalized)
            .reduce(f64::max)
            .ok_or_else(|| Error::invalid(format!("no rows of {} in window [{}, {}]", self.series, window.0, window.1)))
    }
}

/// Fraction of trajectories whose windowed maximum of `b_n · d` is at most
/// `level + eps`.
pub fn finitary_statistic(trajectories: &[Trajectory], level: f64, eps: f64, window: (u64, u64)) -> Result<f64> {
    let thresholds = vec![level + eps; trajectories.len()];
    coverage(trajectories, &thresholds, window)
}

/// Same with one threshold per trajectory, for bounds that depend on the
/// realized directing measure.
pub fn coverage(trajectories: &[Trajectory], thresholds: &[f64], window: (u64, u64)) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::invalid("no trajectories"));
    }
    if thresholds.len() != trajectories.len() {
        return Err(Error::invalid("one threshold per trajectory is required"));
    }
    if window.0 > window.1 {
        return Err(Error::invalid(format!("empty window [{}, {}]", window.0, window.1)));
    }
    let mut hits = 0;
    for (t, &thr) in trajectories.iter().zip(thresholds) {
        if t.window_max(window)? <= thr {
            hits += 1;
        }
    }
    Ok(hits as f64 / trajectories.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Windowed maximum against the bound plus slack.
    Coverage,
    /// `raw(n_hi) <= 0.1 raw(n_min)`.
    Decay,
    /// An inequality or identity that must hold in every cell.
    Invariant,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::Coverage => "coverage",
            CheckKind::Decay => "decay",
            CheckKind::Invariant => "invariant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub replicate: usize,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of one check over all replicates of one series. For coverage and
/// decay `value` is the passing fraction and must reach `threshold`; for
/// invariants it counts failing cells and must be zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub kind: CheckKind,
    pub series: String,
    pub statistic: String,
    pub cells: Vec<Cell>,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub(crate) fn fraction(kind: CheckKind, series: &str, statistic: &str, cells: Vec<Cell>, required: f64, note: String) -> Self {
        let value = cells.iter().filter(|c| c.pass).count() as f64 / cells.len().max(1) as f64;
        Self {
            kind,
            series: series.into(),
            statistic: statistic.into(),
            cells,
            value,
            threshold: required,
            pass: value >= required,
            note,
        }
    }

    pub(crate) fn invariant(series: &str, statistic: &str, cells: Vec<Cell>, note: String) -> Self {
        let failing = cells.iter().filter(|c| !c.pass).count();
        Self {
            kind: CheckKind::Invariant,
            series: series.into(),
            statistic: statistic.into(),
            cells,
            value: failing as f64,
            threshold: 0.0,
            pass: failing == 0,
            note,
        }
    }
}

/// Windowed maxima against per-replicate thresholds.
pub fn coverage_check(
    trajectories: &[&Trajectory],
    thresholds: &[f64],
    window: (u64, u64),
    required: f64,
    note: String,
) -> Result<Check> {
    let series = trajectories.first().map(|t| t.series.clone()).unwrap_or_default();
    let mut cells = Vec::with_capacity(trajectories.len());
    for (t, &thr) in trajectories.iter().zip(thresholds) {
        let value = t.window_max(window)?;
        cells.push(Cell {
            replicate: t.replicate,
            value,
            threshold: thr,
            pass: value <= thr,
        });
    }
    Ok(Check::fraction(
        CheckKind::Coverage,
        &series,
        "window_max",
        cells,
        required,
        note,
    ))
}

/// Ratio `raw(n_hi) / raw(n_min)` against `factor`.
pub fn decay_check(trajectories: &[&Trajectory], factor: f64, required: f64) -> Check {
    let series = trajectories.first().map(|t| t.series.clone()).unwrap_or_default();
    let cells = trajectories
        .iter()
        .map(|t| {
            let first = t.rows[0].raw;
            let last = t.rows[t.rows.len() - 1].raw;
            let value = if first > 0.0 { last / first } else if last == 0.0 { 0.0 } else { f64::INFINITY };
            Cell {
                replicate: t.replicate,
                value,
                threshold: factor,
                pass: last <= factor * first,
            }
        })
        .collect();
    Check::fraction(
        CheckKind::Decay,
        &series,
        "raw_ratio",
        cells,
        required,
        format!("raw(n_hi) <= {factor} raw(n_min)"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(rep: usize, vals: &[(u64, f64)]) -> Trajectory {
        let rows = vals
            .iter()
            .map(|&(n, v)| Row {
                n,
                raw: v,
                normalized: v,
                extra: vec![],
            })
            .collect();
        Trajectory::new("s", rep, rows, vec![]).unwrap()
    }

    #[test]
    fn trivial_levels() {
        let ts = vec![traj(0, &[(10, 0.5), (20, 0.3)]), traj(1, &[(10, 0.2), (20, 0.9)])];
        assert_eq!(finitary_statistic(&ts, 1e300, 0.0, (10, 20)).unwrap(), 1.0);
        assert_eq!(finitary_statistic(&ts, 0.0, 0.0, (10, 20)).unwrap(), 0.0);
        assert_eq!(finitary_statistic(&ts, 0.4, 0.0, (10, 20)).unwrap(), 0.0);
        assert_eq!(finitary_statistic(&ts, 0.4, 0.1, (10, 20)).unwrap(), 0.5);
        assert_eq!(finitary_statistic(&ts, 0.5, 0.0, (10, 10)).unwrap(), 1.0);
        assert_eq!(finitary_statistic(&ts, 0.5, 0.0, (15, 20)).unwrap(), 0.5);
        assert!(finitary_statistic(&ts, 0.5, 0.0, (11, 19)).is_err());
        assert!(finitary_statistic(&ts, 0.5, 0.0, (20, 10)).is_err());
        assert!(finitary_statistic(&[], 0.5, 0.0, (10, 20)).is_err());
    }

    #[test]
    fn trajectory_invariants() {
        let row = |n, raw: f64| Row {
            n,
            raw,
            normalized: raw,
            extra: vec![],
        };
        assert!(Trajectory::new("s", 0, vec![row(2, 0.1), row(2, 0.1)], vec![]).is_err());
        assert!(Trajectory::new("s", 0, vec![row(2, -0.1)], vec![]).is_err());
        assert!(Trajectory::new("s", 0, vec![row(2, f64::NAN)], vec![]).is_err());
        assert!(Trajectory::new("s", 0, vec![], vec![]).is_err());
    }

    #[test]
    fn decay() {
        let a = traj(0, &[(10, 1.0), (20, 0.05)]);
        let b = traj(1, &[(10, 1.0), (20, 0.5)]);
        let c = decay_check(&[&a, &b], 0.1, 0.95);
        assert_eq!(c.value, 0.5);
        assert!(!c.pass);
        assert!(decay_check(&[&a], 0.1, 0.95).pass);
    }
}
