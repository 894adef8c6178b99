//! Command-line driver binding the laboratory together: figure data
//! emission, constant solving, verification suites, spec-driven sweeps,
//! and the quantile-game report.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or
//! configuration error.

mod experiment;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use mechlab::competition::{competition_bounds, competition_constant};
use mechlab::distributions::{Family, Marginal, ProductPrior};
use mechlab::quantile_game::{
    case_probabilities, dominance_report, mixture_weights_m3, DOMINANCE_TOL,
};
use mechlab::suites::run_suite;
use serde::Serialize;

use experiment::{family_label, figure_notes, figure_spec, ExperimentSpec, Panel};

#[derive(Parser)]
#[command(name = "mechlab", version, about = "multi-item auction competition laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit one panel of the headline figure as CSV plus manifest.
    Figure1 {
        #[arg(long, value_enum)]
        panel: Panel,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the competition-complexity constant at one grid point.
    CcConst {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: f64,
    },
    /// Run one named verification suite and print every check.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 509)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Evaluate a JSON experiment spec into CSV plus manifest.
    MechEval {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-derive the quantile-game constants and dominance report as JSON.
    QgameVerify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=3))]
        m: u64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            err.exit()
        }
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Figure1 { panel, out } => {
            let spec = figure_spec(panel, out)?;
            let summary = experiment::run_experiment(&spec, &figure_notes(panel))?;
            println!(
                "wrote {} rows to {} (manifest {})",
                summary.rows,
                summary.csv.display(),
                summary.manifest.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CcConst { n, alpha } => {
            let res = competition_constant(n, alpha)?;
            let (lower, upper) = competition_bounds(n, alpha)?;
            println!("n,alpha,c,lower,upper,f1n,f1nc,f2nc");
            println!(
                "{},{},{},{},{},{},{},{}",
                res.n, res.alpha, res.c, lower, upper, res.f1n, res.f1nc, res.f2nc
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            seed,
            samples,
        } => {
            let report = run_suite(&suite, seed, samples)?;
            for check in &report.checks {
                let detail = if check.detail.is_empty() {
                    String::new()
                } else {
                    format!(" | {}", check.detail)
                };
                println!(
                    "[{}] {} | lhs {:.9} | rhs {:.9} | tol {:.3e}{}",
                    check.status.name(),
                    check.claim,
                    check.lhs,
                    check.rhs,
                    check.tolerance,
                    detail
                );
            }
            let (pass, warn, fail) = report.counts();
            println!(
                "suite {}: {pass} passed, {warn} warned, {fail} failed (seed {seed}, samples {samples})",
                report.suite
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::MechEval { config } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let spec: ExperimentSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let summary = experiment::run_experiment(&spec, &[])?;
            println!(
                "wrote {} rows to {} (manifest {})",
                summary.rows,
                summary.csv.display(),
                summary.manifest.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::QgameVerify { m, trials } => {
            let report = qgame_report(m as usize, trials)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

const QGAME_SEED: u64 = 8871;

#[derive(Serialize)]
struct DominanceEntry {
    instance: String,
    trials: u64,
    seed: u64,
    min_gap: f64,
    violation_found: bool,
}

#[derive(Serialize)]
struct QgameReport {
    m: usize,
    case_probabilities: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture_weights: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture_dominates_split: Option<bool>,
    dominance: Vec<DominanceEntry>,
    min_gap: f64,
    passed: bool,
}

/// Exact case probabilities plus a randomized per-matrix dominance sweep on
/// the two canonical instances. The m = 3 report also re-derives the
/// mixture weights and their prefix-sum dominance over (1/2, 1/4, 1/4).
fn qgame_report(m: usize, trials: u64) -> Result<QgameReport> {
    let cases = case_probabilities(m)?;
    let case_probabilities = cases.iter().map(|r| r.to_string()).collect();
    let (mixture_weights, mixture_dominates_split) = if m == 3 {
        let mw = mixture_weights_m3()?;
        (
            Some(mw.weights.iter().map(|r| r.to_string()).collect()),
            Some(mw.dominates_cdw),
        )
    } else {
        (None, None)
    };
    let instances = [
        Marginal::new(Family::Exponential { rate: 1.0 })?,
        Marginal::new(Family::EqualRevenue)?,
    ];
    let mut dominance = Vec::new();
    let mut min_gap = f64::INFINITY;
    for (idx, mar) in instances.iter().enumerate() {
        let prior = ProductPrior::iid(*mar, m)?;
        let seed = QGAME_SEED + idx as u64;
        let rep = dominance_report(&prior, trials, seed)?;
        min_gap = min_gap.min(rep.min_gap);
        dominance.push(DominanceEntry {
            instance: family_label(mar),
            trials,
            seed,
            min_gap: rep.min_gap,
            violation_found: rep.violating_matrix.is_some(),
        });
    }
    let passed = min_gap >= -DOMINANCE_TOL && mixture_dominates_split.unwrap_or(true);
    Ok(QgameReport {
        m,
        case_probabilities,
        mixture_weights,
        mixture_dominates_split,
        dominance,
        min_gap,
        passed,
    })
}
