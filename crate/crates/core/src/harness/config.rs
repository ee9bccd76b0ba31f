//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{tuple_count, Point, DEFAULT_TUPLE_BUDGET};
use crate::metrics::determining::MAX_PRODUCT_ORDER;
use crate::metrics::ClassConfig;
use crate::models::{BaseKind, ModelConfig, ModelKind};
use crate::rates::{RateKind, MIN_SCHEDULE_N};

pub const MAX_REPLICATES: usize = 100_000;
pub const MAX_POSTERIOR_COUNT: usize = 100_000;
pub const MAX_HORIZON: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Posterior,
    Predictive,
    EmpiricalBayes,
}

/// Which family of rate results an experiment tracks. Selects the metrics,
/// the rate `b_n` and the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Determining-class metrics, `√(n / log log n)`, constant `√2`.
    W,
    /// Order-1 transport on the real line, `√(n / log log n)`, Gini bound.
    G,
    /// Prokhorov metrics, `(n / log n)^{1/4}` (posterior) or `^{1/8}`
    /// (predictive), implicit bound `Y`.
    P,
}

impl Theorem {
    pub fn rate(self, kind: ExperimentKind) -> RateKind {
        match (self, kind) {
            (Theorem::P, ExperimentKind::Predictive) => RateKind::NOverLogEighth,
            (Theorem::P, _) => RateKind::NOverLogQuarter,
            _ => RateKind::SqrtNOverLoglog,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Theorem::W => "W",
            Theorem::G => "G",
            Theorem::P => "P",
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" | "w" => Ok(Theorem::W),
            "G" | "g" => Ok(Theorem::G),
            "P" | "p" => Ok(Theorem::P),
            _ => Err(Error::Config(format!("unknown theorem {s:?}, expected W, G or P"))),
        }
    }
}

/// Bounded test function for the empirical-Bayes experiment. On labelled
/// spaces it is applied to the label index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbFunction {
    Tanh,
    Logistic,
    /// `1{x > 0}`.
    Positive,
    /// `g ≡ 1`.
    Constant,
}

impl EbFunction {
    pub fn eval(self, p: &Point) -> f64 {
        let x = match p {
            Point::Real(x) => *x,
            Point::Label(j) => *j as f64,
            Point::Vector(v) => v.first().copied().unwrap_or(0.0),
        };
        match self {
            EbFunction::Tanh => x.tanh(),
            EbFunction::Logistic => 1.0 / (1.0 + (-x).exp()),
            EbFunction::Positive => f64::from(u8::from(x > 0.0)),
            EbFunction::Constant => 1.0,
        }
    }
}

/// Geometric grid `n_min, n_min·ratio, ...`, rounded, ending at `n_hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n_min: u64,
    pub n_hi: u64,
    pub ratio: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            n_min: 32,
            n_hi: 100_000,
            ratio: 1.3,
        }
    }
}

impl ScheduleConfig {
    pub fn points(&self) -> Result<Vec<u64>> {
        self.validate()?;
        let mut out = vec![self.n_min];
        let mut x = self.n_min as f64;
        loop {
            x *= self.ratio;
            let n = x.round() as u64;
            if n >= self.n_hi {
                break;
            }
            if n > *out.last().expect("nonempty") {
                out.push(n);
            }
        }
        out.push(self.n_hi);
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if self.n_min < MIN_SCHEDULE_N {
            return Err(Error::Config(format!("n_min = {} is below {MIN_SCHEDULE_N}", self.n_min)));
        }
        if self.n_hi < 10 * self.n_min {
            return Err(Error::Config(format!(
                "n_hi = {} must be at least 10 n_min = {}",
                self.n_hi,
                10 * self.n_min
            )));
        }
        if self.n_hi > MAX_HORIZON {
            return Err(Error::Config(format!("n_hi = {} exceeds {MAX_HORIZON}", self.n_hi)));
        }
        if !(self.ratio > 1.0 && self.ratio <= 10.0) {
            return Err(Error::Config(format!("schedule ratio {} must lie in (1, 10]", self.ratio)));
        }
        Ok(())
    }
}

/// Hat functions on `[S]` used by the level-2 determining metric: centered
/// at the prior mean and at `prior_draws` draws from the prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchorConfig {
    pub levels: usize,
    pub prior_draws: usize,
    pub truncation: usize,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            prior_draws: 7,
            truncation: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Stem of the output files.
    pub name: String,
    pub experiment: ExperimentKind,
    pub theorem: Theorem,
    pub seed: u64,
    pub replicates: usize,
    pub schedule: ScheduleConfig,
    /// Posterior draws per scheduled n.
    pub posterior_count: usize,
    /// Batches used for the Monte Carlo standard error.
    pub batches: usize,
    /// The window is `[window_fraction · n_hi, n_hi]`.
    pub window_fraction: f64,
    pub predictive_orders: Vec<usize>,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub class: ClassConfig,
    pub anchors: AnchorConfig,
    pub eb_function: EbFunction,
    /// Exponent `r > 2` of the partition functional reported with `P`.
    pub pi_r: f64,
    /// `ε` of the moment bound reported with `G`.
    pub moment_eps: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            experiment: ExperimentKind::Posterior,
            theorem: Theorem::W,
            seed: 1,
            replicates: 100,
            schedule: ScheduleConfig::default(),
            posterior_count: 2000,
            batches: 10,
            window_fraction: crate::rates::DEFAULT_WINDOW_FRACTION,
            predictive_orders: vec![1, 2],
            threads: 0,
            output_dir: None,
            model: ModelConfig::default(),
            class: ClassConfig::default(),
            anchors: AnchorConfig::default(),
            eb_function: EbFunction::Tanh,
            pi_r: 3.0,
            moment_eps: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn schedule(&self) -> Result<Vec<u64>> {
        self.schedule.points()
    }

    pub fn rate(&self) -> RateKind {
        self.theorem.rate(self.experiment)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("experiment name {:?} is not a file stem", self.name)));
        }
        if self.replicates == 0 || self.replicates > MAX_REPLICATES {
            return Err(Error::Config(format!(
                "replicates = {} must lie in 1..={MAX_REPLICATES}",
                self.replicates
            )));
        }
        let ns = self.schedule()?;
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::Config("window_fraction must lie in (0, 1)".into()));
        }
        if (ns[ns.len() - 1] as f64) < ns[0] as f64 / self.window_fraction {
            return Err(Error::Config("the window starts before n_min".into()));
        }
        if self.batches < 2 || self.posterior_count < self.batches || self.posterior_count > MAX_POSTERIOR_COUNT {
            return Err(Error::Config(format!(
                "posterior_count = {} must lie in {}..={MAX_POSTERIOR_COUNT} with at least 2 batches",
                self.posterior_count,
                self.batches.max(2)
            )));
        }
        if !(self.pi_r > 2.0) {
            return Err(Error::Config(format!("pi_r = {} must exceed 2", self.pi_r)));
        }
        if !(self.moment_eps > 0.0 && self.moment_eps.is_finite()) {
            return Err(Error::Config("moment_eps must be positive".into()));
        }
        let model = self.model.build()?;
        let real = model.space().is_real_line();
        let continuous_base = self.model.kind == ModelKind::DirichletProcess && self.model.base == BaseKind::StandardNormal;
        if self.theorem == Theorem::G && !real {
            return Err(Error::Config("theorem G needs a model on the real line".into()));
        }
        if self.experiment == ExperimentKind::Predictive {
            if continuous_base {
                return Err(Error::Config(
                    "exact predictives need a discrete base measure".into(),
                ));
            }
            if self.predictive_orders.is_empty() {
                return Err(Error::Config("predictive_orders is empty".into()));
            }
            for &m in &self.predictive_orders {
                if m == 0 || m > MAX_PRODUCT_ORDER {
                    return Err(Error::Config(format!("predictive order {m} must lie in 1..={MAX_PRODUCT_ORDER}")));
                }
                tuple_count(self.model.k, m, DEFAULT_TUPLE_BUDGET)?;
            }
        }
        if self.theorem == Theorem::W {
            if self.class.truncation == 0 || self.class.levels == 0 {
                return Err(Error::Config("class needs levels and truncation".into()));
            }
            if self.anchors.levels == 0 || self.anchors.truncation == 0 {
                return Err(Error::Config("anchors need levels and truncation".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let ns = ScheduleConfig::default().points().unwrap();
        assert_eq!(ns[0], 32);
        assert_eq!(*ns.last().unwrap(), 100_000);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
        assert!(ns.len() > 25 && ns.len() < 40, "{}", ns.len());
        for w in ns.windows(2).take(ns.len() - 2) {
            let r = w[1] as f64 / w[0] as f64;
            assert!(r > 1.2 && r < 1.4, "{w:?}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = ExperimentConfig::default();
        ok.validate().unwrap();
        let bad = [
            ExperimentConfig { replicates: 0, ..ok.clone() },
            ExperimentConfig {
                schedule: ScheduleConfig { n_min: 100, n_hi: 999, ratio: 1.3 },
                ..ok.clone()
            },
            ExperimentConfig { window_fraction: 1.0, ..ok.clone() },
            ExperimentConfig { posterior_count: 1, ..ok.clone() },
            ExperimentConfig { theorem: Theorem::G, ..ok.clone() },
            ExperimentConfig { pi_r: 2.0, ..ok.clone() },
            ExperimentConfig { name: "a/b".into(), ..ok.clone() },
            ExperimentConfig {
                experiment: ExperimentKind::Predictive,
                predictive_orders: vec![7],
                ..ok.clone()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            name = "w"
            experiment = "predictive"
            theorem = "W"
            replicates = 3
            predictive_orders = [1, 2]
            [schedule]
            n_min = 32
            n_hi = 1000
            [model]
            kind = "finite_dirichlet"
            k = 3
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.replicates, 3);
        assert_eq!(cfg.schedule.ratio, 1.3);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        assert!(ExperimentConfig::from_toml("replicates = 0").is_err());
        assert!(ExperimentConfig::from_toml("nonsense = 1").is_err());
    }

    #[test]
    fn theorem_parsing() {
        assert_eq!("G".parse::<Theorem>().unwrap(), Theorem::G);
        assert!("Q".parse::<Theorem>().is_err());
        assert_eq!(Theorem::P.rate(ExperimentKind::Predictive), RateKind::NOverLogEighth);
    }
}
