//! Merging of posterior and predictive laws with empirical measures for
//! exchangeable sequences: probability metrics on measures and on laws of
//! measures, conjugate exchangeable models, rate bounds and a Monte Carlo
//! harness.

pub mod error;
pub mod harness;
pub mod measures;
pub mod metrics;
pub mod models;
pub mod rates;

pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentReport, Theorem, Trajectory};
pub use measures::{DiscreteMeasure, GroundSpace, Point, TupleClass, TupleMeasure};
pub use metrics::{BaseMetric, DeterminingClass, Level2Metric, MeasureOnMeasures, QuotientMetric};
pub use models::{ExchangeableModel, ModelConfig, PosteriorState};
