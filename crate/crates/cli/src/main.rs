//! `exmerge`: run merging-rate experiments and compute distances between
//! measures given as text files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use exmerge_core::harness::oracle::run_oracle_checks;
use exmerge_core::harness::{format_number, run_and_emit, ExperimentConfig, ExperimentKind, ExperimentReport, Theorem};
use exmerge_core::measures::text;
use exmerge_core::metrics::{dw, fortet_mourier, ot_cost, prokhorov, w1_real, ClassConfig, DeterminingClass};
use exmerge_core::{Error, Result};

#[derive(Parser)]
#[command(name = "exmerge", version, about = "Merging of posterior and predictive laws with empirical measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    W,
    G,
    P,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    W1,
    Prokhorov,
    Fm,
    #[value(name = "dW")]
    DW,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate(RunArgs),
    /// Run the posterior (or predictive) rate experiment for one theorem.
    Rates {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
    },
    /// Run the empirical-Bayes experiment.
    Eb(RunArgs),
    /// Cross-check the metric solvers on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
    },
    /// Distance between two measures in the text format.
    Dist {
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Transport order for `w1` (1 gives the usual distance).
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        mu: PathBuf,
        nu: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every check passed.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Simulate(args) => experiment(&args, |_| {}),
        Command::Rates { run, theorem } => experiment(&run, |cfg| {
            cfg.theorem = match theorem {
                TheoremArg::W => Theorem::W,
                TheoremArg::G => Theorem::G,
                TheoremArg::P => Theorem::P,
            };
            if cfg.experiment == ExperimentKind::EmpiricalBayes {
                cfg.experiment = ExperimentKind::Posterior;
            }
        }),
        Command::Eb(args) => experiment(&args, |cfg| cfg.experiment = ExperimentKind::EmpiricalBayes),
        Command::OracleCheck { seed, pairs } => {
            let results = run_oracle_checks(seed, pairs)?;
            for r in &results {
                println!(
                    "{} {}: {} cases, max error {} (tolerance {})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.cases,
                    format_number(r.max_error),
                    format_number(r.tolerance)
                );
            }
            Ok(results.iter().all(|r| r.pass))
        }
        Command::Dist { metric, p, mu, nu } => {
            let value = distance(metric, p, &mu, &nu)?;
            println!("{}", format_number(value));
            Ok(true)
        }
    }
}

fn experiment(args: &RunArgs, adjust: impl FnOnce(&mut ExperimentConfig)) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    adjust(&mut cfg);
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let (report, files) = run_and_emit(&cfg, &dir)?;
    print_report(&report);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(report.passed())
}

fn print_report(report: &ExperimentReport) {
    println!(
        "{}: {} replicates, n = {}..{}, window [{}, {}]",
        report.config.name,
        report.config.replicates,
        report.schedule[0],
        report.schedule[report.schedule.len() - 1],
        report.window.0,
        report.window.1
    );
    for c in &report.checks {
        let relation = match c.kind {
            exmerge_core::harness::CheckKind::Invariant => "failing cells, allowed",
            _ => "passing, required",
        };
        println!(
            "{} {} {} {}: {} {relation} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.kind.label(),
            c.series,
            c.statistic,
            format_number(c.value),
            format_number(c.threshold)
        );
    }
    for n in &report.notes {
        println!("note: {n}");
    }
}

fn distance(metric: MetricArg, p: f64, mu_path: &Path, nu_path: &Path) -> Result<f64> {
    let mu = text::read(mu_path)?;
    let nu = text::read(nu_path)?;
    if mu.space() != nu.space() {
        return Err(Error::InvalidInput("the two measures live on different spaces".into()));
    }
    if !matches!(metric, MetricArg::W1) && p != 1.0 {
        return Err(Error::InvalidInput("--p applies to the w1 metric only".into()));
    }
    match metric {
        MetricArg::W1 if p == 1.0 && mu.space().is_real_line() => w1_real(&mu, &nu),
        MetricArg::W1 => ot_cost(&mu, &nu, p),
        MetricArg::Prokhorov => prokhorov(&mu, &nu),
        MetricArg::Fm => fortet_mourier(&mu, &nu),
        MetricArg::DW => {
            let cls = DeterminingClass::new(mu.space().clone(), &ClassConfig::default())?;
            Ok(dw(&mu, &nu, &cls)?.value)
        }
    }
}
