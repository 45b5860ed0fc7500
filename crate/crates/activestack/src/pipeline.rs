//! End-to-end protocols: per-subject active stacking runs, the pooled
//! leave-one-subject-out ridge baseline, and multi-strategy K-sweeps.
//!
//! Every (subject, strategy, K) cell derives its own seed from the global
//! seed and the cell coordinates, so sweeps produce identical tables whether
//! cells run serially or on a thread pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alr::{
    select_gsx, select_igs, select_random, select_rd, select_rd_emcm, EmcmConfig, LabelOracle,
    RecordOracle, RegressorKind,
};
use crate::domain::{Aggregator, EvalRow, EvalTable, SelectionState, Strategy, SubjectRecord};
use crate::ensemble::{
    aggregate_average, aggregate_median, apply_aggregator, build_aggregator, FallbackPolicy,
};
use crate::error::{Error, Result};
use crate::format::{RatioRow, SummaryRow};
use crate::numerics::{derive_seed, RandomSource};
use crate::regressors::{fit_ridge, RidgeConfig, SvrConfig};

/// Which trials the reported RMSE covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseScope {
    /// The remaining N - K unlabeled trials (the pool).
    PoolOnly,
    /// All N trials, labeled included.
    AllTrials,
}

/// Configuration of one per-subject run (and, minus `strategy`/`k`/`seed`,
/// of a whole sweep).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub strategy: Strategy,
    /// Label budget; ignored by unsupervised baselines.
    pub k: usize,
    pub fallback: FallbackPolicy,
    pub seed: u64,
    /// Number of random-sampling repetitions averaged into the RS figure;
    /// repeat `r` runs with seed `seed + r`.
    pub rs_repeats: usize,
    pub rmse_scope: RmseScope,
    /// SVR settings for the stacking model and the iGS/EMCM main models.
    pub svr: SvrConfig,
    /// Ridge settings for LOSO pooling and the EMCM bootstrap committee.
    pub ridge: RidgeConfig,
    pub emcm_committee_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategy: Strategy::AsGsx,
            k: 3,
            fallback: FallbackPolicy::default(),
            seed: 42,
            rs_repeats: 100,
            rmse_scope: RmseScope::PoolOnly,
            svr: SvrConfig::default(),
            ridge: RidgeConfig::default(),
            emcm_committee_size: 4,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.fallback.validate()?;
        self.svr.validate()?;
        self.ridge.validate()?;
        if self.rs_repeats == 0 {
            return Err(Error::InvalidConfig("rs_repeats must be >= 1".into()));
        }
        if self.emcm_committee_size < 2 {
            return Err(Error::InvalidConfig(
                "EMCM committee size must be >= 2".into(),
            ));
        }
        Ok(())
    }

    fn emcm(&self) -> EmcmConfig {
        EmcmConfig {
            committee_size: self.emcm_committee_size,
            committee: RegressorKind::Ridge(self.ridge.clone()),
            main: RegressorKind::Svr(self.svr.clone()),
        }
    }
}

/// Root mean squared error between estimates and references, in bpm.
pub fn rmse(estimates: &[f64], references: &[f64]) -> Result<f64> {
    if estimates.len() != references.len() {
        return Err(Error::dims(
            "rmse operands",
            references.len(),
            estimates.len(),
        ));
    }
    if estimates.is_empty() {
        return Err(Error::empty("rmse over zero trials"));
    }
    let mut sum = 0.0;
    for (e, r) in estimates.iter().zip(references) {
        if !e.is_finite() || !r.is_finite() {
            return Err(Error::non_finite("rmse input"));
        }
        let d = e - r;
        sum += d * d;
    }
    Ok((sum / estimates.len() as f64).sqrt())
}

/// Everything produced by one per-subject run.
#[derive(Debug, Clone)]
pub struct SubjectRun {
    /// Estimates over the scored trials (see `scored_trials`).
    pub estimates: Vec<f64>,
    /// Trial indices the RMSE covers, in increasing order.
    pub scored_trials: Vec<usize>,
    pub rmse: f64,
    pub selection: SelectionState,
    pub aggregator: Option<Aggregator>,
    /// Non-fatal solver issues (currently: SVR non-convergence).
    pub warnings: Vec<String>,
}

/// Runs one strategy on one subject. For `Strategy::Rs` the run repeats
/// `rs_repeats` times with derived seeds and reports the mean RMSE (the
/// returned artifacts come from the first repeat). `Strategy::Loso` needs a
/// cohort and is rejected here.
pub fn run_subject(record: &SubjectRecord, cfg: &RunConfig) -> Result<SubjectRun> {
    cfg.validate()?;
    record.validate()?;
    match cfg.strategy {
        Strategy::Average | Strategy::Median => run_unsupervised(record, cfg),
        Strategy::Loso => Err(Error::InvalidConfig(
            "loso needs a cohort; use run_loso or sweep".into(),
        )),
        Strategy::Rs => {
            let mut total = 0.0;
            let mut first: Option<SubjectRun> = None;
            for repeat in 0..cfg.rs_repeats {
                let seed = cfg.seed.wrapping_add(repeat as u64);
                let run = run_supervised_once(record, cfg, seed)?;
                total += run.rmse;
                if first.is_none() {
                    first = Some(run);
                }
            }
            let mut run = first.expect("rs_repeats >= 1");
            run.rmse = total / cfg.rs_repeats as f64;
            Ok(run)
        }
        _ => run_supervised_once(record, cfg, cfg.seed),
    }
}

fn run_unsupervised(record: &SubjectRecord, cfg: &RunConfig) -> Result<SubjectRun> {
    let estimates = match cfg.strategy {
        Strategy::Average => aggregate_average(record.predictions()),
        Strategy::Median => aggregate_median(record.predictions()),
        _ => unreachable!("callers route only baselines here"),
    };
    let all: Vec<usize> = (0..record.n_trials()).collect();
    let value = rmse(&estimates, record.references())?;
    Ok(SubjectRun {
        estimates,
        scored_trials: all,
        rmse: value,
        selection: SelectionState::from_selected(Vec::new(), Vec::new(), record.n_trials()),
        aggregator: None,
        warnings: Vec::new(),
    })
}

fn run_supervised_once(record: &SubjectRecord, cfg: &RunConfig, seed: u64) -> Result<SubjectRun> {
    let x = record.predictions();
    let n = record.n_trials();
    let k = cfg.k;
    let mut rng = RandomSource::new(seed);
    let mut oracle = RecordOracle::with_budget(record.references(), k);

    let mut selection = match cfg.strategy {
        Strategy::Rs => select_random(x, k, &mut rng)?,
        Strategy::AsGsx => select_gsx(x, k)?,
        Strategy::AsRd => select_rd(x, k, &mut rng)?,
        Strategy::AsRdEmcm => select_rd_emcm(x, k, &mut oracle, &cfg.emcm(), &mut rng)?,
        Strategy::AsIgs => select_igs(x, k, &mut oracle, &RegressorKind::Svr(cfg.svr.clone()))?,
        _ => unreachable!("callers route only supervised strategies here"),
    };
    // Label-free selections query all chosen trials now.
    if selection.labels.is_empty() {
        let mut labels = Vec::with_capacity(k);
        for &i in &selection.labeled {
            labels.push(oracle.query(i)?);
        }
        selection.labels = labels;
    }
    debug_assert_eq!(oracle.queries(), k);

    let x_labeled: Vec<Vec<f64>> = selection.labeled.iter().map(|&i| x[i].clone()).collect();
    let (aggregator, svr_fit) =
        build_aggregator(&x_labeled, &selection.labels, &cfg.fallback, &cfg.svr)?;
    let mut warnings = Vec::new();
    if let Some(fit) = &svr_fit {
        if !fit.converged {
            warnings.push(format!(
                "svr did not converge within {} iterations (objective {})",
                fit.iterations, fit.objective
            ));
        }
    }

    let scored_trials: Vec<usize> = match cfg.rmse_scope {
        RmseScope::PoolOnly => selection.pool.clone(),
        RmseScope::AllTrials => (0..n).collect(),
    };
    if scored_trials.is_empty() {
        return Err(Error::empty(
            "no trials to score: K = N with pool-only scope",
        ));
    }
    let rows: Vec<Vec<f64>> = scored_trials.iter().map(|&i| x[i].clone()).collect();
    let estimates = apply_aggregator(&aggregator, &rows)?;
    let refs: Vec<f64> = scored_trials
        .iter()
        .map(|&i| record.references()[i])
        .collect();
    let value = rmse(&estimates, &refs)?;

    Ok(SubjectRun {
        estimates,
        scored_trials,
        rmse: value,
        selection,
        aggregator: Some(aggregator),
        warnings,
    })
}

/// Leave-one-subject-out baseline: for each held-out subject, ridge stacking
/// is fit on the pooled trials of all other subjects and scored on every
/// trial of the held-out one.
pub fn run_loso(subjects: &[SubjectRecord], ridge: &RidgeConfig) -> Result<Vec<f64>> {
    if subjects.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "loso requires >= 2 subjects, got {}",
            subjects.len()
        )));
    }
    let m = subjects[0].n_estimators();
    for s in subjects {
        if s.n_estimators() != m {
            return Err(Error::dims(
                format!("subject {} estimator count", s.subject_id()),
                m,
                s.n_estimators(),
            ));
        }
    }
    let mut out = Vec::with_capacity(subjects.len());
    for (hold, held_out) in subjects.iter().enumerate() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, s) in subjects.iter().enumerate() {
            if i == hold {
                continue;
            }
            x.extend(s.predictions().iter().cloned());
            y.extend_from_slice(s.references());
        }
        let model = fit_ridge(&x, &y, ridge)?;
        let estimates: Vec<f64> = held_out
            .predictions()
            .iter()
            .map(|row| model.predict(row))
            .collect::<Result<_>>()?;
        out.push(rmse(&estimates, held_out.references())?);
    }
    Ok(out)
}

/// A sweep's table plus its derived summaries.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: EvalTable,
    pub summaries: Vec<SummaryRow>,
    /// Mean-RMSE ratio of each non-RS supervised strategy to RS at the same K
    /// (present only when RS is part of the sweep).
    pub rs_ratios: Vec<RatioRow>,
    /// Warnings from individual cells, labeled by (subject, strategy, K).
    pub warnings: Vec<String>,
}

/// Evaluates the cross-product of subjects, strategies and label budgets.
///
/// Supervised strategies produce one row per (subject, K); unsupervised
/// baselines one row per subject with K = 0. Failed cells are recorded with
/// an error marker instead of aborting. Each supervised cell runs with seed
/// `derive_seed(base.seed, [subject_id, K])`, so results do not depend on
/// evaluation order or worker count, and strategies that degenerate into one
/// another at K = 2 produce identical rows.
pub fn sweep(
    subjects: &[SubjectRecord],
    strategies: &[Strategy],
    k_values: &[usize],
    base: &RunConfig,
) -> Result<SweepOutcome> {
    if subjects.is_empty() {
        return Err(Error::empty("sweep over zero subjects"));
    }
    if strategies.is_empty() {
        return Err(Error::empty("sweep over zero strategies"));
    }
    base.validate()?;
    for record in subjects {
        record.validate()?;
    }
    let supervised_ks = |s: Strategy| -> &[usize] {
        if s.is_supervised() {
            k_values
        } else {
            &[0]
        }
    };
    if strategies.iter().any(|s| s.is_supervised()) && k_values.is_empty() {
        return Err(Error::empty(
            "sweep with supervised strategies needs K values",
        ));
    }

    // LOSO is cohort-level: compute per-subject values once, serially.
    let loso_values: Option<Result<Vec<f64>>> = strategies
        .contains(&Strategy::Loso)
        .then(|| run_loso(subjects, &base.ridge));

    let mut cells = Vec::new();
    for &strategy in strategies {
        for &k in supervised_ks(strategy) {
            for (si, record) in subjects.iter().enumerate() {
                cells.push((strategy, k, si, record));
            }
        }
    }

    let results: Vec<(EvalRow, Vec<String>)> = cells
        .par_iter()
        .map(|&(strategy, k, si, record)| {
            let subject_id = record.subject_id().to_string();
            match strategy {
                Strategy::Loso => {
                    let (rmse, error) = match loso_values.as_ref().expect("loso computed") {
                        Ok(values) => (Some(values[si]), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    (
                        EvalRow {
                            subject_id,
                            strategy,
                            k: 0,
                            seed: 0,
                            rmse,
                            error,
                        },
                        Vec::new(),
                    )
                }
                Strategy::Average | Strategy::Median => {
                    let mut cfg = base.clone();
                    cfg.strategy = strategy;
                    let (rmse, error) = flatten(run_subject(record, &cfg));
                    (
                        EvalRow {
                            subject_id,
                            strategy,
                            k: 0,
                            seed: 0,
                            rmse,
                            error,
                        },
                        Vec::new(),
                    )
                }
                _ => {
                    let seed = derive_seed(base.seed, &[record.subject_id(), &k.to_string()]);
                    let mut cfg = base.clone();
                    cfg.strategy = strategy;
                    cfg.k = k;
                    cfg.seed = seed;
                    let outcome = run_subject(record, &cfg);
                    let warnings = match &outcome {
                        Ok(run) => run
                            .warnings
                            .iter()
                            .map(|w| format!("{subject_id}/{strategy}/K={k}: {w}"))
                            .collect(),
                        Err(_) => Vec::new(),
                    };
                    let (rmse, error) = flatten(outcome);
                    (
                        EvalRow {
                            subject_id,
                            strategy,
                            k,
                            seed,
                            rmse,
                            error,
                        },
                        warnings,
                    )
                }
            }
        })
        .collect();

    let mut table = EvalTable::default();
    let mut warnings = Vec::new();
    for (row, mut cell_warnings) in results {
        table.rows.push(row);
        warnings.append(&mut cell_warnings);
    }
    table.validate()?;

    let summaries = summarize(&table);
    let rs_ratios = ratios_to_rs(&summaries);
    Ok(SweepOutcome {
        table,
        summaries,
        rs_ratios,
        warnings,
    })
}

fn flatten(outcome: Result<SubjectRun>) -> (Option<f64>, Option<String>) {
    match outcome {
        Ok(run) => (Some(run.rmse), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Mean and sample standard deviation per (strategy, K), over rows that
/// produced an RMSE.
pub fn summarize(table: &EvalTable) -> Vec<SummaryRow> {
    let mut keys: Vec<(Strategy, usize)> = Vec::new();
    for row in &table.rows {
        let key = (row.strategy, row.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|&(strategy, k)| {
            let values: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.strategy == strategy && r.k == k)
                .filter_map(|r| r.rmse)
                .collect();
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n.max(1) as f64;
            let std = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                strategy,
                k,
                mean_rmse: mean,
                std_rmse: std,
                n_subjects: n,
            }
        })
        .collect()
}

fn ratios_to_rs(summaries: &[SummaryRow]) -> Vec<RatioRow> {
    let mut out = Vec::new();
    for s in summaries {
        if !s.strategy.is_supervised() || s.strategy == Strategy::Rs {
            continue;
        }
        let rs = summaries
            .iter()
            .find(|r| r.strategy == Strategy::Rs && r.k == s.k);
        if let Some(rs) = rs {
            if rs.mean_rmse > 0.0 {
                out.push(RatioRow {
                    strategy: s.strategy,
                    k: s.k,
                    ratio_to_rs: s.mean_rmse / rs.mean_rmse,
                });
            }
        }
    }
    out
}

/// Per-subject mean RMSE over a window of K values, in the table's subject
/// order. Errors if any (subject, strategy, K) cell is missing or failed.
pub fn mean_rmse_over_k(
    table: &EvalTable,
    strategy: Strategy,
    k_values: &[usize],
) -> Result<Vec<f64>> {
    if k_values.is_empty() {
        return Err(Error::empty("mean over an empty K window"));
    }
    let subjects = table.subjects();
    let mut out = Vec::with_capacity(subjects.len());
    for subject in &subjects {
        let mut sum = 0.0;
        for &k in k_values {
            let row = table
                .rows
                .iter()
                .find(|r| r.subject_id == *subject && r.strategy == strategy && r.k == k)
                .ok_or_else(|| Error::MissingCell {
                    subject: subject.clone(),
                    strategy: strategy.to_string(),
                    k,
                })?;
            match row.rmse {
                Some(v) => sum += v,
                None => {
                    return Err(Error::MissingCell {
                        subject: subject.clone(),
                        strategy: strategy.to_string(),
                        k,
                    })
                }
            }
        }
        out.push(sum / k_values.len() as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_cohort, CohortSpec};

    fn small_cohort(n: usize, seed: u64) -> Vec<SubjectRecord> {
        generate_cohort(&CohortSpec {
            n_subjects: n,
            trials_range: (15, 25),
            seed,
            ..CohortSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 1.0);
        let v = rmse(&[0.0, 0.0, 0.0], &[3.0, 4.0, 0.0]).unwrap();
        assert!((v - (25.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn exact_estimator_with_median_fallback_gives_zero_rmse() {
        let mut records = small_cohort(1, 7);
        let record = records.remove(0);
        // Plant an exact estimator.
        let mut predictions = record.predictions().to_vec();
        for (row, &y) in predictions.iter_mut().zip(record.references()) {
            row[3] = y;
        }
        let record = SubjectRecord::new(
            record.subject_id(),
            predictions,
            record.references().to_vec(),
        )
        .unwrap();
        let cfg = RunConfig {
            strategy: Strategy::AsGsx,
            k: 3,
            ..RunConfig::default()
        };
        let run = run_subject(&record, &cfg).unwrap();
        assert_eq!(run.rmse, 0.0);
        assert!(matches!(
            run.aggregator,
            Some(Aggregator::MedianFallback { .. })
        ));
    }

    #[test]
    fn rd_emcm_at_k2_matches_rd_in_full_runs() {
        let records = small_cohort(3, 11);
        for record in &records {
            let rd = RunConfig {
                strategy: Strategy::AsRd,
                k: 2,
                seed: 99,
                ..RunConfig::default()
            };
            let emcm = RunConfig {
                strategy: Strategy::AsRdEmcm,
                k: 2,
                seed: 99,
                ..RunConfig::default()
            };
            let a = run_subject(record, &rd).unwrap();
            let b = run_subject(record, &emcm).unwrap();
            assert_eq!(a.selection.labeled, b.selection.labeled);
            assert_eq!(a.rmse, b.rmse);
        }
    }

    #[test]
    fn run_subject_is_deterministic() {
        let records = small_cohort(1, 5);
        for strategy in Strategy::SUPERVISED {
            let cfg = RunConfig {
                strategy,
                k: 4,
                rs_repeats: 3,
                seed: 1234,
                ..RunConfig::default()
            };
            let a = run_subject(&records[0], &cfg).unwrap();
            let b = run_subject(&records[0], &cfg).unwrap();
            assert_eq!(a.rmse.to_bits(), b.rmse.to_bits(), "{strategy}");
            assert_eq!(a.selection, b.selection);
        }
    }

    #[test]
    fn pool_only_scope_scores_exactly_the_pool() {
        let records = small_cohort(1, 21);
        let cfg = RunConfig {
            strategy: Strategy::AsGsx,
            k: 5,
            ..RunConfig::default()
        };
        let run = run_subject(&records[0], &cfg).unwrap();
        assert_eq!(run.scored_trials, run.selection.pool);
        assert_eq!(run.estimates.len(), records[0].n_trials() - 5);

        let all_cfg = RunConfig {
            rmse_scope: RmseScope::AllTrials,
            ..cfg
        };
        let all_run = run_subject(&records[0], &all_cfg).unwrap();
        assert_eq!(all_run.estimates.len(), records[0].n_trials());
    }

    #[test]
    fn loso_perfect_single_estimator_recovers_references() {
        // M=1 with predictions equal to references: pooled ridge learns
        // w ~ 1, b ~ 0 up to lambda shrinkage.
        let make = |id: &str, n: usize, base: f64| {
            let refs: Vec<f64> = (0..n).map(|t| base + (t % 7) as f64).collect();
            let preds: Vec<Vec<f64>> = refs.iter().map(|&y| vec![y]).collect();
            SubjectRecord::new(id, preds, refs).unwrap()
        };
        let subjects = vec![make("a", 120, 70.0), make("b", 120, 70.0)];
        let rmses = run_loso(&subjects, &RidgeConfig { lambda: 0.01 }).unwrap();
        for r in rmses {
            assert!(r < 1e-3, "rmse {r}");
        }
    }

    #[test]
    fn loso_is_invariant_to_subject_order() {
        let records = small_cohort(4, 31);
        let forward = run_loso(&records, &RidgeConfig::default()).unwrap();
        let mut reversed_records = records.clone();
        reversed_records.reverse();
        let reversed = run_loso(&reversed_records, &RidgeConfig::default()).unwrap();
        for (i, r) in forward.iter().enumerate() {
            let j = records.len() - 1 - i;
            assert!((r - reversed[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn loso_matches_two_step_recomputation() {
        let records = small_cohort(4, 37);
        let ridge = RidgeConfig::default();
        let rmses = run_loso(&records, &ridge).unwrap();
        for hold in 0..records.len() {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (i, s) in records.iter().enumerate() {
                if i != hold {
                    x.extend(s.predictions().iter().cloned());
                    y.extend_from_slice(s.references());
                }
            }
            let model = fit_ridge(&x, &y, &ridge).unwrap();
            let est: Vec<f64> = records[hold]
                .predictions()
                .iter()
                .map(|row| model.predict(row).unwrap())
                .collect();
            let expected = rmse(&est, records[hold].references()).unwrap();
            assert_eq!(rmses[hold].to_bits(), expected.to_bits());
        }
    }

    #[test]
    fn sweep_row_counts_and_self_consistency() {
        let records = small_cohort(3, 41);
        let strategies = [
            Strategy::AsGsx,
            Strategy::Rs,
            Strategy::Average,
            Strategy::Loso,
        ];
        let base = RunConfig {
            rs_repeats: 5,
            ..RunConfig::default()
        };
        let outcome = sweep(&records, &strategies, &[2, 3], &base).unwrap();
        // 3 subjects * 2 supervised * 2 K + 3 average + 3 loso rows.
        assert_eq!(outcome.table.rows.len(), 3 * 2 * 2 + 3 + 3);
        outcome.table.validate().unwrap();

        // Emitted summaries match recomputation from raw rows.
        for s in &outcome.summaries {
            let values: Vec<f64> = outcome
                .table
                .rows
                .iter()
                .filter(|r| r.strategy == s.strategy && r.k == s.k)
                .filter_map(|r| r.rmse)
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            assert!((mean - s.mean_rmse).abs() < 1e-12);
            if values.len() > 1 {
                let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (values.len() - 1) as f64)
                    .sqrt();
                assert!((std - s.std_rmse).abs() < 1e-12);
            }
        }
        // Ratios reference the RS mean at the same K.
        for ratio in &outcome.rs_ratios {
            let s = outcome
                .summaries
                .iter()
                .find(|r| r.strategy == ratio.strategy && r.k == ratio.k)
                .unwrap();
            let rs = outcome
                .summaries
                .iter()
                .find(|r| r.strategy == Strategy::Rs && r.k == ratio.k)
                .unwrap();
            assert!((ratio.ratio_to_rs - s.mean_rmse / rs.mean_rmse).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_single_cell_contract() {
        let records = small_cohort(1, 43);
        let outcome = sweep(&records, &[Strategy::AsGsx], &[2], &RunConfig::default()).unwrap();
        assert_eq!(outcome.table.rows.len(), 1);
        let row = &outcome.table.rows[0];
        assert_eq!(row.strategy, Strategy::AsGsx);
        assert_eq!(row.k, 2);
        assert!(row.rmse.is_some());
    }

    #[test]
    fn sweep_records_error_rows_for_oversized_k() {
        // A subject with fewer trials than K gets an error marker for that
        // cell; the sweep and the other cells proceed.
        let records = generate_cohort(&CohortSpec {
            n_subjects: 1,
            trials_range: (4, 4),
            seed: 61,
            ..CohortSpec::default()
        })
        .unwrap();
        let outcome = sweep(&records, &[Strategy::AsGsx], &[3, 9], &RunConfig::default()).unwrap();
        assert_eq!(outcome.table.rows.len(), 2);
        let ok_row = &outcome.table.rows[0];
        assert_eq!(ok_row.k, 3);
        assert!(ok_row.rmse.is_some());
        let bad_row = &outcome.table.rows[1];
        assert_eq!(bad_row.k, 9);
        assert!(bad_row.rmse.is_none());
        assert!(bad_row.error.as_deref().unwrap().contains("out of range"));
        // Summaries skip the failed cell.
        let summary = outcome
            .summaries
            .iter()
            .find(|s| s.k == 9)
            .expect("summary row exists");
        assert_eq!(summary.n_subjects, 0);
    }

    #[test]
    fn sweep_records_loso_error_rows_for_single_subject() {
        let records = small_cohort(1, 47);
        let outcome = sweep(&records, &[Strategy::Loso], &[], &RunConfig::default()).unwrap();
        assert_eq!(outcome.table.rows.len(), 1);
        assert!(outcome.table.rows[0].rmse.is_none());
        assert!(outcome.table.rows[0]
            .error
            .as_deref()
            .unwrap()
            .contains("2 subjects"));
    }

    #[test]
    fn supervised_runs_consume_exactly_k_labels() {
        // The budgeted oracle inside run_subject makes over-querying an
        // error; a successful run with budget K proves <= K, and the
        // aggregator needs all K labels, so this checks exact consumption.
        let records = small_cohort(2, 53);
        for strategy in Strategy::SUPERVISED {
            let cfg = RunConfig {
                strategy,
                k: 4,
                rs_repeats: 2,
                ..RunConfig::default()
            };
            let run = run_subject(&records[0], &cfg).unwrap();
            assert_eq!(run.selection.labeled.len(), 4);
            assert_eq!(run.selection.labels.len(), 4);
        }
    }

    #[test]
    fn mean_rmse_over_k_examples() {
        let mut table = EvalTable::default();
        for (subject, k, value) in [
            ("a", 2, 1.0),
            ("a", 3, 3.0),
            ("b", 2, 2.0),
            ("b", 3, 4.0),
            ("c", 2, 5.0),
            ("c", 3, 7.0),
        ] {
            table.rows.push(EvalRow {
                subject_id: subject.into(),
                strategy: Strategy::AsGsx,
                k,
                seed: 0,
                rmse: Some(value),
                error: None,
            });
        }
        // Hand-averaged (1+3)/2, (2+4)/2, (5+7)/2.
        assert_eq!(
            mean_rmse_over_k(&table, Strategy::AsGsx, &[2, 3]).unwrap(),
            vec![2.0, 3.0, 6.0]
        );
        // Window of size 1 is the raw column.
        assert_eq!(
            mean_rmse_over_k(&table, Strategy::AsGsx, &[3]).unwrap(),
            vec![3.0, 4.0, 7.0]
        );
        let missing = mean_rmse_over_k(&table, Strategy::AsGsx, &[2, 4]).unwrap_err();
        assert!(matches!(missing, Error::MissingCell { k: 4, .. }));
    }
}
