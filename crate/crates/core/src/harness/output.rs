//! CSV files and SVG plots of a finished experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::experiments::ExperimentReport;
use crate::error::{Error, Result};

/// Decimal rendering with 12 significant digits, trailing zeros dropped;
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Trajectory table: one row per (series, replicate, n).
pub fn trajectory_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("series,replicate,n,raw,normalized");
    for c in report.extra_columns.iter().chain(&report.bound_columns) {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for t in &report.trajectories {
        let bounds: Vec<String> = report.bound_columns.iter().map(|c| opt(t.bound(c))).collect();
        for r in &t.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                t.series,
                t.replicate,
                r.n,
                format_number(r.raw),
                format_number(r.normalized)
            );
            for v in &r.extra {
                out.push(',');
                out.push_str(&opt(*v));
            }
            for b in &bounds {
                out.push(',');
                out.push_str(b);
            }
            out.push('\n');
        }
    }
    out
}

/// One row per check cell (per replicate) and one total row per check.
pub fn summary_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("kind,series,replicate,statistic,value,threshold,pass\n");
    for c in &report.checks {
        for cell in &c.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.kind.label(),
                c.series,
                cell.replicate,
                c.statistic,
                format_number(cell.value),
                format_number(cell.threshold),
                cell.pass
            );
        }
        let total = match c.kind {
            super::stats::CheckKind::Invariant => "failing_cells",
            _ => "fraction",
        };
        let _ = writeln!(
            out,
            "{},{},all,{},{},{},{}",
            c.kind.label(),
            c.series,
            total,
            format_number(c.value),
            format_number(c.threshold),
            c.pass
        );
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn plot_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Normalized trajectories of one series on a log n axis, with the bound plus
/// slack (its median when it varies by replicate) as a horizontal line.
pub fn plot_series(report: &ExperimentReport, series: &str, path: &Path) -> Result<()> {
    let ts = report.series_trajectories(series);
    let (lo, hi) = (report.schedule[0] as f64, *report.schedule.last().expect("schedule") as f64);
    let mut thresholds: Vec<f64> = report
        .checks
        .iter()
        .filter(|c| c.series == series && c.kind == super::stats::CheckKind::Coverage)
        .flat_map(|c| c.cells.iter().map(|cell| cell.threshold))
        .filter(|v| v.is_finite())
        .collect();
    thresholds.sort_by(f64::total_cmp);
    let level = thresholds.get(thresholds.len() / 2).copied();
    let top = ts
        .iter()
        .flat_map(|t| t.rows.iter().map(|r| r.normalized))
        .chain(level)
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_error(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{} / {series}", report.config.name), ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d((lo..hi).log_scale(), 0.0..top)
        .map_err(|e| plot_error(path, e))?;
    chart
        .configure_mesh()
        .x_desc("n")
        .y_desc(format!("{} x distance", report.config.rate().label()))
        .draw()
        .map_err(|e| plot_error(path, e))?;
    for t in &ts {
        chart
            .draw_series(LineSeries::new(
                t.rows.iter().map(|r| (r.n as f64, r.normalized)),
                BLUE.mix(0.3),
            ))
            .map_err(|e| plot_error(path, e))?;
    }
    if let Some(l) = level {
        chart
            .draw_series(LineSeries::new([(lo, l), (hi, l)], RED.stroke_width(2)))
            .map_err(|e| plot_error(path, e))?;
    }
    root.present().map_err(|e| plot_error(path, e))?;
    Ok(())
}

/// Writes `<name>.csv`, `<name>_summary.csv` and one `<name>_<series>.svg`
/// per series into `dir`, returning the paths.
pub fn emit_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &report.config.name;
    let csv = dir.join(format!("{name}.csv"));
    write(&csv, &trajectory_csv(report))?;
    let summary = dir.join(format!("{name}_summary.csv"));
    write(&summary, &summary_csv(report))?;
    let mut files = vec![csv, summary];
    if !report.trajectories.is_empty() {
        for s in &report.series {
            let svg = dir.join(format!("{name}_{s}.svg"));
            plot_series(report, s, &svg)?;
            files.push(svg);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2f64.sqrt()), "1.41421356237");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(1.234e-9), "1.234e-9");
        assert_eq!(format_number(0.000123), "0.000123");
        assert_eq!(format_number(1e15), "1e15");
        assert_eq!(format_number(99999.99999999999), "100000");
        assert_eq!(format_number(f64::NAN), "nan");
        for x in [0.1, 7.123456789012345, 3.0e-3, 1e-300, 6.02e23] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs(), "{x}");
        }
    }
}
