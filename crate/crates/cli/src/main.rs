//! Command-line harness: cohort generation, K-sweep evaluation, and the
//! pairwise statistical comparison, with reproducible seeded runs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
//! (non-convergence with `--strict`).

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use activestack::Error;

#[derive(Parser)]
#[command(
    name = "activestack",
    about = "Active-learning-driven stacking of heart-rate base estimators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate selection strategies and baselines over a cohort and write
    /// report files.
    Run(RunArgs),
    /// Run the pairwise comparison test on an existing results CSV.
    Stats(StatsArgs),
    /// Generate a synthetic cohort as per-subject CSV files.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Subject CSV file or directory of CSV files.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<std::path::PathBuf>,
    /// Synthetic cohort preset: `default` (100 subjects) or `small` (10).
    #[arg(long)]
    synthetic: Option<String>,
    /// Comma-separated strategies (rs,as_gsx,as_rd,as_rd_emcm,as_igs);
    /// baselines (average, median, loso) are always evaluated too.
    #[arg(long, default_value = "rs,as_gsx,as_rd,as_rd_emcm,as_igs")]
    strategies: String,
    /// Label budget range `a..b` (inclusive) or a single value.
    #[arg(long, default_value = "2..7")]
    k: String,
    /// Global seed; falls back to env `ACTIVESTACK_SEED`, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Consistent-estimator fallback variant: median, subset, or all.
    #[arg(long, default_value = "median")]
    fallback: String,
    /// Absolute bpm tolerance for label/estimator matching.
    #[arg(long, default_value_t = 1e-9)]
    match_tolerance: f64,
    /// RMSE scope: `pool` (the N-K unlabeled trials) or `all`.
    #[arg(long, default_value = "pool")]
    rmse_scope: String,
    /// Random-sampling repetitions averaged into the RS rows.
    #[arg(long, default_value_t = 100)]
    rs_repeats: usize,
    /// SVR epsilon-insensitivity width in bpm.
    #[arg(long, default_value_t = 0.0)]
    tube: f64,
    /// Bootstrap committee size for RD-EMCM.
    #[arg(long, default_value_t = 4)]
    emcm_p: usize,
    /// Worker threads for the sweep; 0 = automatic.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory for report.json and evaltable.csv.
    #[arg(long, default_value = "report")]
    out: std::path::PathBuf,
    /// Significance level for the pairwise comparison.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Exit with code 3 if any solver failed to converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// Results CSV produced by `run` (evaltable.csv).
    #[arg(long)]
    table: std::path::PathBuf,
    /// K window `a..b` for the per-subject mean, inclusive.
    #[arg(long, default_value = "2..7")]
    k: String,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Output file for the comparison matrix JSON; stdout when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of subjects.
    #[arg(long)]
    subjects: usize,
    /// Cohort seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory for the per-subject CSV files.
    #[arg(long)]
    out: std::path::PathBuf,
    /// Trials per subject, `a..b` inclusive.
    #[arg(long, default_value = "40..120")]
    trials: String,
    /// Number of base estimators.
    #[arg(long, default_value_t = 12)]
    estimators: usize,
    /// Baseline heart-rate range `a..b` in bpm.
    #[arg(long, default_value = "50..120")]
    baseline: String,
    /// Per-step reference drift standard deviation (bpm).
    #[arg(long, default_value_t = 3.0)]
    drift_sd: f64,
    /// Per-cell estimator noise standard deviation (bpm).
    #[arg(long, default_value_t = 2.0)]
    noise_sd: f64,
    /// Per-cell breakdown probability.
    #[arg(long, default_value_t = 0.005)]
    breakdown_prob: f64,
    /// Probability that a subject has one estimator equal to the references.
    #[arg(long, default_value_t = 0.25)]
    exact_prob: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path too.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => commands::cmd_run(args),
        Command::Stats(args) => commands::cmd_stats(args),
        Command::Gen(args) => commands::cmd_gen(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) => 1,
        Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::NegativePrediction { .. }
        | Error::NonPositiveReference { .. }
        | Error::EmptyInput { .. }
        | Error::OutOfRange { .. }
        | Error::MissingCell { .. }
        | Error::Oracle { .. }
        | Error::Parse { .. }
        | Error::Io(_) => 2,
    }
}
