//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use activestack::datagen::{generate_cohort, CohortSpec};
use activestack::domain::{EvalTable, Strategy, SubjectRecord};
use activestack::ensemble::{FallbackPolicy, FallbackVariant};
use activestack::format::{
    eval_table_to_csv, load_cohort, parse_eval_table_csv, write_cohort, Report, ReportConfig,
};
use activestack::pipeline::{mean_rmse_over_k, sweep, RmseScope, RunConfig, SweepOutcome};
use activestack::stats::{dunn_fdr, ComparisonMatrix};
use activestack::{Error, Result};

use crate::{GenArgs, RunArgs, StatsArgs};

fn parse_range(text: &str, what: &str) -> Result<(usize, usize)> {
    let parse_one = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad {what} bound `{s}`")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse_one(a)?, parse_one(b)?),
        None => {
            let v = parse_one(text)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(Error::InvalidConfig(format!("empty {what} range `{text}`")));
    }
    Ok((lo, hi))
}

fn parse_range_f64(text: &str, what: &str) -> Result<(f64, f64)> {
    let parse_one = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad {what} bound `{s}`")))
    };
    match text.split_once("..") {
        Some((a, b)) => Ok((parse_one(a)?, parse_one(b)?)),
        None => {
            let v = parse_one(text)?;
            Ok((v, v))
        }
    }
}

fn parse_strategies(text: &str) -> Result<Vec<Strategy>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let strategy: Strategy = part.parse()?;
        if !out.contains(&strategy) {
            out.push(strategy);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("no strategies given".into()));
    }
    Ok(out)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("ACTIVESTACK_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad ACTIVESTACK_SEED `{text}`"))),
        Err(_) => Ok(42),
    }
}

pub fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let seed = resolve_seed(args.seed)?;
    let (k_lo, k_hi) = parse_range(&args.k, "K")?;
    if k_lo < 2 {
        return Err(Error::InvalidConfig(format!(
            "supervised strategies need K >= 2, got {k_lo}"
        )));
    }
    let k_values: Vec<usize> = (k_lo..=k_hi).collect();

    let fallback_variant = match args.fallback.as_str() {
        "median" => FallbackVariant::Median,
        "subset" => FallbackVariant::Subset,
        "all" => FallbackVariant::All,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown fallback variant `{other}` (median|subset|all)"
            )))
        }
    };
    let rmse_scope = match args.rmse_scope.as_str() {
        "pool" => RmseScope::PoolOnly,
        "all" => RmseScope::AllTrials,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown rmse scope `{other}` (pool|all)"
            )))
        }
    };

    let (cohort, data_source) = load_or_generate(&args, seed)?;
    let mut strategies = parse_strategies(&args.strategies)?;
    // Baselines always run alongside the requested strategies.
    for baseline in [Strategy::Average, Strategy::Median, Strategy::Loso] {
        if !strategies.contains(&baseline) {
            strategies.push(baseline);
        }
    }

    let mut base = RunConfig {
        strategy: Strategy::AsGsx,
        k: k_lo,
        fallback: FallbackPolicy {
            variant: fallback_variant,
            match_tolerance: args.match_tolerance,
        },
        seed,
        rs_repeats: args.rs_repeats,
        rmse_scope,
        emcm_committee_size: args.emcm_p,
        ..RunConfig::default()
    };
    base.svr.tube = args.tube;

    let outcome = run_sweep_with_jobs(&cohort, &strategies, &k_values, &base, args.jobs)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    let comparisons = comparison_matrix(&outcome.table, &strategies, &k_values, args.alpha);
    if comparisons.is_none() {
        eprintln!("note: pairwise comparison skipped (needs >= 2 supervised strategies with complete cells)");
    }

    let report = Report {
        config: ReportConfig {
            data_source,
            strategies: strategies.clone(),
            k_range: (k_lo, k_hi),
            seed,
            fallback_variant: args.fallback.clone(),
            match_tolerance: args.match_tolerance,
            rmse_scope: args.rmse_scope.clone(),
            rs_repeats: args.rs_repeats,
            svr_c: base.svr.c,
            svr_tube: base.svr.tube,
            svr_tol: base.svr.tol,
            svr_max_iter: base.svr.max_iter,
            ridge_lambda: base.ridge.lambda,
            emcm_committee_size: args.emcm_p,
            stats_k_window: (k_lo, k_hi),
            alpha: args.alpha,
        },
        summaries: outcome.summaries.clone(),
        rs_ratios: outcome.rs_ratios.clone(),
        comparisons,
        table: outcome.table.rows.clone(),
    };

    fs::create_dir_all(&args.out)?;
    let table_path = args.out.join("evaltable.csv");
    fs::File::create(&table_path)?.write_all(eval_table_to_csv(&outcome.table).as_bytes())?;
    let report_path = args.out.join("report.json");
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    fs::File::create(&report_path)?.write_all(json.as_bytes())?;

    println!(
        "subjects: {}  rows: {}",
        cohort.len(),
        outcome.table.rows.len()
    );
    println!(
        "{:>12} {:>3} {:>12} {:>12} {:>4}",
        "strategy", "K", "mean rmse", "std", "n"
    );
    for s in &report.summaries {
        println!(
            "{:>12} {:>3} {:>12.4} {:>12.4} {:>4}",
            s.strategy.to_string(),
            s.k,
            s.mean_rmse,
            s.std_rmse,
            s.n_subjects
        );
    }
    println!("wrote {}", table_path.display());
    println!("wrote {}", report_path.display());

    if args.strict && !outcome.warnings.is_empty() {
        eprintln!("error: numerical warnings present under --strict");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_or_generate(args: &RunArgs, seed: u64) -> Result<(Vec<SubjectRecord>, String)> {
    match (&args.data, &args.synthetic) {
        (Some(path), None) => Ok((load_cohort(path)?, path.display().to_string())),
        (None, Some(preset)) => {
            let spec = match preset.as_str() {
                "default" => CohortSpec {
                    seed,
                    ..CohortSpec::default()
                },
                "small" => CohortSpec {
                    seed,
                    ..CohortSpec::small()
                },
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown synthetic preset `{other}` (default|small)"
                    )))
                }
            };
            Ok((generate_cohort(&spec)?, format!("synthetic:{preset}")))
        }
        (None, None) => Err(Error::InvalidConfig(
            "one of --data or --synthetic is required".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn run_sweep_with_jobs(
    cohort: &[SubjectRecord],
    strategies: &[Strategy],
    k_values: &[usize],
    base: &RunConfig,
    jobs: usize,
) -> Result<SweepOutcome> {
    if jobs == 0 {
        return sweep(cohort, strategies, k_values, base);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    pool.install(|| sweep(cohort, strategies, k_values, base))
}

/// Per-subject mean RMSE over the K window for each supervised strategy,
/// fed to Dunn's test. `None` when fewer than two supervised strategies are
/// present or any cell is missing/failed.
fn comparison_matrix(
    table: &EvalTable,
    strategies: &[Strategy],
    k_values: &[usize],
    alpha: f64,
) -> Option<ComparisonMatrix> {
    let supervised: Vec<Strategy> = Strategy::SUPERVISED
        .iter()
        .copied()
        .filter(|s| strategies.contains(s))
        .collect();
    if supervised.len() < 2 || k_values.is_empty() {
        return None;
    }
    let mut groups = Vec::with_capacity(supervised.len());
    for &strategy in &supervised {
        groups.push(mean_rmse_over_k(table, strategy, k_values).ok()?);
    }
    let names: Vec<String> = supervised.iter().map(|s| s.to_string()).collect();
    dunn_fdr(&groups, &names, alpha).ok()
}

pub fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let (k_lo, k_hi) = parse_range(&args.k, "K")?;
    let k_values: Vec<usize> = (k_lo..=k_hi).collect();
    let content = fs::read_to_string(&args.table)?;
    let table = parse_eval_table_csv(&args.table.display().to_string(), &content)?;
    table.validate().map_err(|e| Error::Parse {
        file: args.table.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;

    let supervised: Vec<Strategy> = Strategy::SUPERVISED
        .iter()
        .copied()
        .filter(|s| table.rows.iter().any(|r| r.strategy == *s))
        .collect();
    if supervised.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "pairwise comparison needs >= 2 supervised strategies in the table, found {}",
            supervised.len()
        )));
    }
    let mut groups = Vec::with_capacity(supervised.len());
    for &strategy in &supervised {
        groups.push(mean_rmse_over_k(&table, strategy, &k_values)?);
    }
    let names: Vec<String> = supervised.iter().map(|s| s.to_string()).collect();
    let matrix = dunn_fdr(&groups, &names, args.alpha)?;

    print_matrix(&matrix);
    let mut json = serde_json::to_string_pretty(&matrix).expect("matrix serializes");
    json.push('\n');
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::File::create(path)?.write_all(json.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn print_matrix(matrix: &ComparisonMatrix) {
    println!("corrected p-values (alpha = {}):", matrix.alpha);
    print!("{:>12}", "");
    for name in &matrix.names {
        print!(" {name:>11}");
    }
    println!();
    for (i, name) in matrix.names.iter().enumerate() {
        print!("{name:>12}");
        for j in 0..matrix.names.len() {
            if i == j {
                print!(" {:>11}", "-");
            } else {
                let mark = if matrix.significant[i][j] { "*" } else { "" };
                print!(
                    " {:>11}",
                    format!("{:.4}{}", matrix.corrected_p[i][j], mark)
                );
            }
        }
        println!();
    }
}

pub fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let trials = parse_range(&args.trials, "trials")?;
    let baseline = parse_range_f64(&args.baseline, "baseline")?;
    let spec = CohortSpec {
        n_subjects: args.subjects,
        trials_range: trials,
        n_estimators: args.estimators,
        baseline_bpm: baseline,
        drift_sd: args.drift_sd,
        estimator_noise_sd: args.noise_sd,
        breakdown_prob: args.breakdown_prob,
        exact_estimator_prob: args.exact_prob,
        seed: args.seed,
        ..CohortSpec::default()
    };
    let cohort = generate_cohort(&spec)?;
    let paths = write_cohort(&args.out, &cohort)?;
    println!(
        "wrote {} subject files under {}",
        paths.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
