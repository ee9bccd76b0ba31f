//! Experiment driver: configuration, replicate workers, finitary statistics
//! and output files.

pub mod config;
pub mod experiments;
pub mod oracle;
pub mod output;
pub mod stats;

use std::path::{Path, PathBuf};

pub use config::{AnchorConfig, EbFunction, ExperimentConfig, ExperimentKind, ScheduleConfig, Theorem};
pub use experiments::{run, run_empirical_bayes, run_partial, run_posterior_rate, run_predictive_rate, ExperimentReport};
pub use output::{emit_outputs, format_number};
pub use stats::{coverage, finitary_statistic, Check, CheckKind, Row, Trajectory};

use crate::error::Result;

/// Runs an experiment and writes its outputs to `dir`. When a replicate
/// fails, the finished replicates are still written before the error is
/// returned.
pub fn run_and_emit(cfg: &ExperimentConfig, dir: &Path) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    let (report, err) = run_partial(cfg)?;
    let files = emit_outputs(&report, dir)?;
    match err {
        Some(e) => Err(e),
        None => Ok((report, files)),
    }
}
