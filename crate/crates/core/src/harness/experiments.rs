//! Monte Carlo drivers: one worker per replicate, merged by replicate id.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, Theorem};
use super::stats::{coverage_check, decay_check, Cell, Check, Row, Trajectory};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::metrics::level2::prokhorov_to_dirac_from_distances;
use crate::metrics::{
    dw, dw_product, series_distance, tuple_law_dist, AnchorClass, BaseMetric, DeterminingClass, QuotientMetric,
};
use crate::models::seed::{stream, Purpose};
use crate::models::{ExchangeableModel, PosteriorState};
use crate::rates::{gini_bound, moment_bound, pi_r, y_estimator, RateSchedule, DEFAULT_PI_STAGES};

/// Tolerance of the pointwise empirical-Bayes inequality and of its oracle.
pub const EB_TOLERANCE: f64 = 1e-9;
/// Tolerance of the identity between the product series at `m = 1` and the
/// series on measures.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
/// Decay demanded between the first and last scheduled n.
pub const DECAY_FACTOR: f64 = 0.1;
pub const DECAY_REQUIRED: f64 = 0.95;

/// Everything an experiment produced.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub schedule: Vec<u64>,
    pub window: (u64, u64),
    pub extra_columns: Vec<String>,
    pub bound_columns: Vec<String>,
    /// Grouped by series (in `series` order), then by replicate.
    pub trajectories: Vec<Trajectory>,
    pub series: Vec<String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn series_trajectories(&self, series: &str) -> Vec<&Trajectory> {
        self.trajectories.iter().filter(|t| t.series == series).collect()
    }

    pub fn check(&self, series: &str, kind: super::stats::CheckKind) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.series == series && c.kind == kind).collect()
    }

    pub fn extra_index(&self, column: &str) -> Option<usize> {
        self.extra_columns.iter().position(|c| c == column)
    }
}

/// Shared, read-only state of a run.
struct Context {
    cfg: ExperimentConfig,
    model: Arc<ExchangeableModel>,
    schedule: Vec<u64>,
    rate: RateSchedule,
    ground: Option<DeterminingClass>,
    anchors: Option<Anchors>,
    /// Prior predictive mean of the empirical-Bayes function and the total
    /// prior mass.
    eb_prior: (f64, f64),
}

struct Anchors {
    class: AnchorClass,
    /// Ground-class features of each anchor.
    features: Vec<Vec<f64>>,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let model = Arc::new(cfg.model.build()?);
        let schedule = cfg.schedule()?;
        let rate = RateSchedule::new(cfg.rate(), schedule[0])?;
        let ground = if cfg.theorem == Theorem::W {
            Some(DeterminingClass::new(model.space(), &cfg.class)?)
        } else {
            None
        };
        let anchors = match (&ground, cfg.experiment) {
            (Some(g), ExperimentKind::Posterior) => {
                let mut rng = stream(cfg.seed, 0, Purpose::Anchors);
                let mut list = vec![PosteriorState::new(model.clone()).predictive_one()];
                list.extend((0..cfg.anchors.prior_draws).map(|_| model.draw_prior(&mut rng)));
                let features = list.iter().map(|a| g.features(a)).collect();
                let class = AnchorClass::new(list, cfg.anchors.levels, cfg.anchors.truncation)?;
                Some(Anchors { class, features })
            }
            _ => None,
        };
        let prior = PosteriorState::new(model.clone());
        let mass = match &*model {
            ExchangeableModel::FiniteDirichlet(m) => m.concentration().iter().sum(),
            ExchangeableModel::DirichletProcess(m) => m.alpha(),
        };
        let g = cfg.eb_function;
        let eb_prior = (prior.bayes_estimator(|x| g.eval(x)), mass);
        Ok(Self {
            cfg: cfg.clone(),
            model,
            schedule,
            rate,
            ground,
            anchors,
            eb_prior,
        })
    }

    fn window(&self) -> (u64, u64) {
        let hi = *self.schedule.last().expect("nonempty schedule");
        ((self.cfg.window_fraction * hi as f64).ceil() as u64, hi)
    }

    fn series_names(&self) -> Vec<String> {
        let t = self.cfg.theorem.label();
        match self.cfg.experiment {
            ExperimentKind::Posterior => vec![format!("posterior_{t}")],
            ExperimentKind::Predictive => self
                .cfg
                .predictive_orders
                .iter()
                .map(|m| format!("predictive_{t}_m{m}"))
                .collect(),
            ExperimentKind::EmpiricalBayes => vec![format!("eb_{t}")],
        }
    }

    fn extra_columns(&self) -> Vec<String> {
        let cols: &[&str] = match (self.cfg.experiment, self.cfg.theorem) {
            (ExperimentKind::Posterior, Theorem::P) => &["mc_se", "truth"],
            (ExperimentKind::Posterior, _) => &["mc_se"],
            (ExperimentKind::Predictive, Theorem::W) => &["identity_gap"],
            (ExperimentKind::Predictive, Theorem::P) => &["truth"],
            (ExperimentKind::Predictive, _) => &[],
            (ExperimentKind::EmpiricalBayes, _) => &["bayes", "empirical", "gap", "normalized_gap", "oracle_gap"],
        };
        cols.iter().map(|s| s.to_string()).collect()
    }

    fn bound_columns(&self) -> Vec<String> {
        let cols: &[&str] = match (self.cfg.experiment, self.cfg.theorem) {
            (ExperimentKind::EmpiricalBayes, _) => &["gini_g"],
            (_, Theorem::W) => &[],
            (_, Theorem::G) => &["gini_hat", "moment_hat", "gini_true", "moment_true"],
            (ExperimentKind::Posterior, Theorem::P) => &["y", "pi_r"],
            (_, Theorem::P) => &["y", "y_predictive", "pi_r"],
        };
        cols.iter().map(|s| s.to_string()).collect()
    }
}

/// Runs the configured experiment. Fails on the first replicate error.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (report, err) = run_partial(cfg)?;
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

pub fn run_posterior_rate(cfg: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Posterior,
        ..cfg.clone()
    };
    Ok(run(&cfg)?.trajectories)
}

pub fn run_predictive_rate(cfg: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Predictive,
        ..cfg.clone()
    };
    Ok(run(&cfg)?.trajectories)
}

pub fn run_empirical_bayes(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::EmpiricalBayes,
        ..cfg.clone()
    };
    run(&cfg)
}

/// Runs every replicate and reports the ones that finished, together with
/// the first error (by replicate id) if any failed. Configuration errors are
/// returned directly.
pub fn run_partial(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Option<Error>)> {
    let ctx = Context::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<Trajectory>>> =
        pool.install(|| (0..cfg.replicates).into_par_iter().map(|r| replicate(&ctx, r)).collect());
    let mut per_replicate = Vec::new();
    let mut first_err = None;
    for res in results {
        match res {
            Ok(t) => per_replicate.push(t),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let series = ctx.series_names();
    let mut trajectories = Vec::new();
    for (i, _) in series.iter().enumerate() {
        for reps in &per_replicate {
            trajectories.push(reps[i].clone());
        }
    }
    let mut report = ExperimentReport {
        config: cfg.clone(),
        schedule: ctx.schedule.clone(),
        window: ctx.window(),
        extra_columns: ctx.extra_columns(),
        bound_columns: ctx.bound_columns(),
        trajectories,
        series,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    if !per_replicate.is_empty() {
        report.checks = checks(&ctx, &report)?;
    }
    report.notes = notes(&ctx, &report);
    Ok((report, first_err))
}

fn empirical(state: &PosteriorState) -> Result<DiscreteMeasure> {
    let n = state.n() as f64;
    let pairs = state.counts().iter().map(|(p, &c)| (p.clone(), c as f64 / n)).collect();
    DiscreteMeasure::from_pairs(state.model().space(), pairs)
}

/// Splits `count` draws into `batches` nearly equal consecutive runs.
fn batch_bounds(count: usize, batches: usize) -> Vec<(usize, usize)> {
    let (q, r) = (count / batches, count % batches);
    let mut out = Vec::with_capacity(batches);
    let mut start = 0;
    for b in 0..batches {
        let len = q + usize::from(b < r);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Standard error of the full-sample estimate from the spread of batch
/// estimates.
fn batch_se(stats: &[f64]) -> f64 {
    let b = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / b;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

fn row(n: u64, raw: f64, b: f64, extra: Vec<Option<f64>>) -> Row {
    let raw = raw.max(0.0);
    Row {
        n,
        raw,
        normalized: b * raw,
        extra,
    }
}

fn replicate(ctx: &Context, r: usize) -> Result<Vec<Trajectory>> {
    let cfg = &ctx.cfg;
    let n_hi = *ctx.schedule.last().expect("nonempty schedule");
    let (p_true, xs) = ctx.model.sample_sequence(n_hi as usize, &mut stream(cfg.seed, r as u64, Purpose::Prior))?;
    let mut rng = stream(cfg.seed, r as u64, Purpose::Posterior);
    let mut state = PosteriorState::new(ctx.model.clone());
    let series = ctx.series_names();
    let mut rows: Vec<Vec<Row>> = vec![Vec::new(); series.len()];
    let mut truth = Vec::with_capacity(ctx.schedule.len());
    let mut last_empirical = None;
    let g = cfg.eb_function;
    for &n in &ctx.schedule {
        state.observe_all(&xs[state.n() as usize..n as usize])?;
        let e_n = empirical(&state)?;
        let b = ctx.rate.rate(n)?;
        if cfg.theorem == Theorem::P {
            truth.push(BaseMetric::Prokhorov.distance(&p_true, &e_n)?);
        }
        match cfg.experiment {
            ExperimentKind::Posterior => {
                let (raw, se) = posterior_distance(ctx, &state, &e_n, &mut rng)?;
                let mut extra = vec![Some(se)];
                if cfg.theorem == Theorem::P {
                    extra.push(truth.last().copied());
                }
                rows[0].push(row(n, raw, b, extra));
            }
            ExperimentKind::Predictive => {
                for (i, &m) in cfg.predictive_orders.iter().enumerate() {
                    let pm = state.predictive_m(m)?;
                    let em = e_n.product_power(m)?;
                    let (raw, extra) = match cfg.theorem {
                        Theorem::W => {
                            let cls = ctx.ground.as_ref().expect("class built for W");
                            let v = dw_product(&pm, &em, cls, m)?.value;
                            let gap = if m == 1 {
                                Some((v - dw(&state.predictive_one(), &e_n, cls)?.value).abs())
                            } else {
                                None
                            };
                            (v, vec![gap])
                        }
                        Theorem::G => (tuple_law_dist(&pm, &em, QuotientMetric::Wasserstein1)?, vec![]),
                        Theorem::P => (
                            tuple_law_dist(&pm, &em, QuotientMetric::Prokhorov)?,
                            vec![truth.last().copied()],
                        ),
                    };
                    rows[i].push(row(n, raw, b, extra));
                }
            }
            ExperimentKind::EmpiricalBayes => {
                let bayes = state.bayes_estimator(|x| g.eval(x));
                let emp = e_n.expect(|x| g.eval(x));
                let pushed_pred = state.predictive_one().pushforward(|x| g.eval(x))?;
                let pushed_emp = e_n.pushforward(|x| g.eval(x))?;
                let w1 = BaseMetric::Wasserstein1.distance(&pushed_pred, &pushed_emp)?;
                let gap = (bayes - emp).abs();
                let (m0, mass) = ctx.eb_prior;
                let oracle = mass / (mass + n as f64) * (m0 - emp).abs();
                let extra = vec![Some(bayes), Some(emp), Some(gap), Some(b * gap), Some(oracle)];
                rows[0].push(row(n, w1, b, extra));
            }
        }
        last_empirical = Some(e_n);
    }
    let e_hi = last_empirical.expect("nonempty schedule");
    let mut bounds: Vec<(String, f64)> = Vec::new();
    match (cfg.experiment, cfg.theorem) {
        (ExperimentKind::EmpiricalBayes, _) => {
            bounds.push(("gini_g".into(), gini_bound(&p_true.pushforward(|x| g.eval(x))?)?));
        }
        (_, Theorem::W) => {}
        (_, Theorem::G) => {
            bounds.push(("gini_hat".into(), gini_bound(&e_hi)?));
            bounds.push(("moment_hat".into(), moment_bound(&e_hi, cfg.moment_eps)?));
            bounds.push(("gini_true".into(), gini_bound(&p_true)?));
            bounds.push(("moment_true".into(), moment_bound(&p_true, cfg.moment_eps)?));
        }
        (kind, Theorem::P) => {
            let y = y_estimator(&ctx.schedule, &truth, cfg.window_fraction)?.value;
            bounds.push(("y".into(), y));
            if kind == ExperimentKind::Predictive {
                bounds.push(("y_predictive".into(), (1.5 * y).sqrt()));
            }
            // The functional stays finite on a finite space; on the line it
            // is reported for the truncated directing measure.
            bounds.push(("pi_r".into(), pi_r(&p_true, cfg.pi_r, DEFAULT_PI_STAGES)?.value));
        }
    }
    series
        .into_iter()
        .zip(rows)
        .map(|(s, rows)| Trajectory::new(s, r, rows, bounds.clone()))
        .collect()
}

/// Level-2 distance between the posterior (as `posterior_count` Monte Carlo
/// draws) and `δ_{e_n}`, with a batch-means standard error.
fn posterior_distance<R: Rng + ?Sized>(
    ctx: &Context,
    state: &PosteriorState,
    e_n: &DiscreteMeasure,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let cfg = &ctx.cfg;
    let batches = batch_bounds(cfg.posterior_count, cfg.batches);
    match cfg.theorem {
        Theorem::W => {
            let ground = ctx.ground.as_ref().expect("class built for W");
            let anchors = ctx.anchors.as_ref().expect("anchors built for W");
            let to_anchors = |mu: &DiscreteMeasure| -> Vec<f64> {
                let f = ground.features(mu);
                anchors.features.iter().map(|a| series_distance(&f, a)).collect()
            };
            let fe = anchors.class.features_from_distances(&to_anchors(e_n));
            let t = fe.len();
            let mut total = vec![0.0; t];
            let mut stats = Vec::with_capacity(batches.len());
            for &(lo, hi) in &batches {
                let mut sum = vec![0.0; t];
                for _ in lo..hi {
                    let p = state.draw_posterior(rng);
                    for (s, f) in sum.iter_mut().zip(anchors.class.features_from_distances(&to_anchors(&p))) {
                        *s += f;
                    }
                }
                let mean: Vec<f64> = sum.iter().map(|s| s / (hi - lo) as f64).collect();
                stats.push(series_distance(&mean, &fe));
                for (a, s) in total.iter_mut().zip(&sum) {
                    *a += s;
                }
            }
            let mean: Vec<f64> = total.iter().map(|s| s / cfg.posterior_count as f64).collect();
            Ok((series_distance(&mean, &fe), batch_se(&stats)))
        }
        Theorem::G | Theorem::P => {
            let base = if cfg.theorem == Theorem::G {
                BaseMetric::Wasserstein1
            } else {
                BaseMetric::Prokhorov
            };
            let d = (0..cfg.posterior_count)
                .map(|_| base.distance(&state.draw_posterior(rng), e_n))
                .collect::<Result<Vec<f64>>>()?;
            let stat = |d: &[f64]| -> f64 {
                if cfg.theorem == Theorem::G {
                    d.iter().sum::<f64>() / d.len() as f64
                } else {
                    prokhorov_to_dirac_from_distances(d, &vec![1.0 / d.len() as f64; d.len()])
                }
            };
            let stats: Vec<f64> = batches.iter().map(|&(lo, hi)| stat(&d[lo..hi])).collect();
            Ok((stat(&d), batch_se(&stats)))
        }
    }
}

/// Bound `L` and slack `ε` of a series for one trajectory, and the coverage
/// that is demanded.
fn level(ctx: &Context, t: &Trajectory, m: usize) -> Result<(f64, f64, f64)> {
    let bound = |name: &str| {
        t.bound(name)
            .ok_or_else(|| Error::invalid(format!("trajectory lacks bound {name}")))
    };
    let m = m as f64;
    Ok(match (ctx.cfg.experiment, ctx.cfg.theorem) {
        (ExperimentKind::EmpiricalBayes, _) => {
            let l = bound("gini_g")?;
            (l, 0.1 * l, 0.90)
        }
        (_, Theorem::W) => (2f64.sqrt() * m, 0.1 * m, 0.95),
        (_, Theorem::G) => {
            let l = bound("gini_hat")?;
            (l, 0.1 * l, 0.90)
        }
        (ExperimentKind::Predictive, Theorem::P) => {
            let l = bound("y_predictive")?;
            (l, 0.2 * l, 0.90)
        }
        (_, Theorem::P) => {
            let l = bound("y")?;
            (l, 0.2 * l, 0.90)
        }
    })
}

fn checks(ctx: &Context, report: &ExperimentReport) -> Result<Vec<Check>> {
    let cfg = &ctx.cfg;
    let mut out = Vec::new();
    for (i, name) in report.series.iter().enumerate() {
        let ts = report.series_trajectories(name);
        let m = match cfg.experiment {
            ExperimentKind::Predictive => cfg.predictive_orders[i],
            _ => 1,
        };
        let mut thresholds = Vec::with_capacity(ts.len());
        let mut required = 0.0;
        for t in &ts {
            let (l, eps, req) = level(ctx, t, m)?;
            thresholds.push(l + eps);
            required = req;
        }
        let note = format!(
            "max of {} x raw over n in [{}, {}] against bound plus slack; finite-n calibration",
            cfg.rate().label(),
            report.window.0,
            report.window.1
        );
        out.push(coverage_check(&ts, &thresholds, report.window, required, note)?);
        out.push(decay_check(&ts, DECAY_FACTOR, DECAY_REQUIRED));

        let column = |name: &str| report.extra_index(name);
        match (cfg.experiment, cfg.theorem) {
            (ExperimentKind::Predictive, Theorem::W) if m == 1 => {
                let k = column("identity_gap").expect("column present");
                out.push(cell_invariant(name, "identity_gap", &ts, IDENTITY_TOLERANCE, |r| {
                    r.extra[k].unwrap_or(f64::INFINITY)
                }));
            }
            (ExperimentKind::EmpiricalBayes, _) => {
                let (gap, oracle) = (column("gap").expect("gap"), column("oracle_gap").expect("oracle"));
                out.push(cell_invariant(name, "gap_minus_w1", &ts, EB_TOLERANCE, |r| {
                    r.extra[gap].unwrap_or(f64::INFINITY) - r.raw
                }));
                out.push(cell_invariant(name, "oracle_error", &ts, EB_TOLERANCE, |r| {
                    (r.extra[gap].unwrap_or(f64::INFINITY) - r.extra[oracle].unwrap_or(f64::INFINITY)).abs()
                }));
            }
            (_, Theorem::G) => {
                for (gini, moment) in [("gini_hat", "moment_hat"), ("gini_true", "moment_true")] {
                    let cells = ts
                        .iter()
                        .map(|t| {
                            let (g, mo) = (t.bound(gini).unwrap_or(f64::NAN), t.bound(moment).unwrap_or(f64::NAN));
                            Cell {
                                replicate: t.replicate,
                                value: g,
                                threshold: mo,
                                pass: g <= mo,
                            }
                        })
                        .collect();
                    out.push(Check::invariant(name, &format!("{gini}_le_{moment}"), cells, "exact".into()));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// One cell per replicate holding the worst row value of `f`, which must stay
/// at or below `tol`.
fn cell_invariant(series: &str, statistic: &str, ts: &[&Trajectory], tol: f64, f: impl Fn(&Row) -> f64) -> Check {
    let cells = ts
        .iter()
        .map(|t| {
            let worst = t.rows.iter().map(&f).fold(f64::NEG_INFINITY, f64::max);
            Cell {
                replicate: t.replicate,
                value: worst,
                threshold: tol,
                pass: worst <= tol,
            }
        })
        .collect();
    Check::invariant(series, statistic, cells, format!("every row within {tol:e}"))
}

fn notes(ctx: &Context, report: &ExperimentReport) -> Vec<String> {
    let cfg = &ctx.cfg;
    let mut out = vec![
        format!("rate {}", cfg.rate().label()),
        "coverage thresholds are a finite-n calibration of almost sure limsup bounds".to_string(),
    ];
    if let Some(a) = &ctx.anchors {
        out.push(format!(
            "level-2 class: {} anchors, {} generators, tail bound {:e}; ground class tail bound {:e}",
            a.class.anchors().len(),
            a.class.truncation(),
            a.class.tail_bound(),
            ctx.ground.as_ref().map(|g| g.tail_bound()).unwrap_or(0.0),
        ));
    }
    if cfg.experiment == ExperimentKind::Posterior {
        out.push(format!(
            "posterior represented by {} draws per n, standard error from {} batches",
            cfg.posterior_count, cfg.batches
        ));
    }
    if cfg.theorem == Theorem::P {
        out.push("Y is a plug-in estimate over the trailing window; the partition functional is finite for finitely supported directing measures".into());
    }
    if let ExchangeableModel::DirichletProcess(m) = &*ctx.model {
        out.push(format!(
            "stick-breaking truncated at {} pieces, expected residual {:e}",
            m.truncation(),
            m.residual_mean()
        ));
    }
    if report.trajectories.is_empty() {
        out.push("no replicate finished".into());
    }
    out
}
