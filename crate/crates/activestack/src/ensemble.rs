//! Final-estimate aggregation.
//!
//! Unsupervised row-wise mean/median, plus the supervised rule used by all
//! active stacking runs: if some base estimators reproduce the queried labels
//! exactly (within `match_tolerance`), take their per-trial median; otherwise
//! train a linear SVR stacking model. The `Subset` and `All` variants swap the
//! median for an SVR on the consistent columns or on all columns.

use serde::{Deserialize, Serialize};

use crate::domain::Aggregator;
use crate::error::{Error, Result};
use crate::numerics::median;
use crate::regressors::{fit_svr, SvrConfig, SvrFit};

/// What to do when some base estimators match the queried labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackVariant {
    /// Median of the consistent estimators (the default; smallest RMSEs).
    Median,
    /// Linear SVR restricted to the consistent estimator columns.
    Subset,
    /// Linear SVR on all columns, ignoring consistency.
    All,
}

/// Fallback rule configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackPolicy {
    pub variant: FallbackVariant,
    /// Absolute bpm tolerance for "identical estimates to the true labels".
    pub match_tolerance: f64,
}

impl Default for FallbackPolicy {
    fn default() -> Self {
        FallbackPolicy {
            variant: FallbackVariant::Median,
            match_tolerance: 1e-9,
        }
    }
}

impl FallbackPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_tolerance >= 0.0 && self.match_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "match_tolerance must be finite and >= 0, got {}",
                self.match_tolerance
            )));
        }
        Ok(())
    }
}

/// Row-wise arithmetic mean of the estimator columns.
pub fn aggregate_average(predictions: &[Vec<f64>]) -> Vec<f64> {
    predictions
        .iter()
        .map(|row| row.iter().sum::<f64>() / row.len() as f64)
        .collect()
}

/// Row-wise median of the estimator columns.
pub fn aggregate_median(predictions: &[Vec<f64>]) -> Vec<f64> {
    predictions
        .iter()
        .map(|row| median(row).expect("non-empty row"))
        .collect()
}

/// Estimator columns whose outputs match every queried label within `tol`.
/// `x_labeled` holds the labeled trials' prediction rows, aligned with
/// `labels`. The result is sorted and possibly empty.
pub fn find_consistent(x_labeled: &[Vec<f64>], labels: &[f64], tol: f64) -> Result<Vec<usize>> {
    if x_labeled.is_empty() {
        return Err(Error::empty("consistency check with no labeled trials"));
    }
    if labels.len() != x_labeled.len() {
        return Err(Error::dims(
            "consistency labels",
            x_labeled.len(),
            labels.len(),
        ));
    }
    let m = x_labeled[0].len();
    let consistent = (0..m)
        .filter(|&col| {
            x_labeled
                .iter()
                .zip(labels)
                .all(|(row, &y)| (row[col] - y).abs() <= tol)
        })
        .collect();
    Ok(consistent)
}

/// Builds the final per-trial aggregation rule from the labeled trials.
///
/// With a non-empty consistent set the policy variant decides; with an empty
/// one a linear SVR on all columns is trained regardless of the variant. The
/// SVR fit is returned alongside so callers can surface non-convergence.
pub fn build_aggregator(
    x_labeled: &[Vec<f64>],
    labels: &[f64],
    policy: &FallbackPolicy,
    svr_cfg: &SvrConfig,
) -> Result<(Aggregator, Option<SvrFit>)> {
    policy.validate()?;
    let consistent = find_consistent(x_labeled, labels, policy.match_tolerance)?;
    if !consistent.is_empty() {
        match policy.variant {
            FallbackVariant::Median => {
                return Ok((Aggregator::MedianFallback { consistent }, None));
            }
            FallbackVariant::Subset => {
                let projected: Vec<Vec<f64>> = x_labeled
                    .iter()
                    .map(|row| consistent.iter().map(|&c| row[c]).collect())
                    .collect();
                let fit = fit_svr(&projected, labels, svr_cfg)?;
                return Ok((
                    Aggregator::Linear {
                        model: fit.model.clone(),
                        columns: Some(consistent),
                    },
                    Some(fit),
                ));
            }
            FallbackVariant::All => {}
        }
    }
    let fit = fit_svr(x_labeled, labels, svr_cfg)?;
    Ok((
        Aggregator::Linear {
            model: fit.model.clone(),
            columns: None,
        },
        Some(fit),
    ))
}

/// Applies the aggregation rule to every row of a prediction matrix.
pub fn apply_aggregator(agg: &Aggregator, predictions: &[Vec<f64>]) -> Result<Vec<f64>> {
    match agg {
        Aggregator::MedianFallback { consistent } => {
            if consistent.is_empty() {
                return Err(Error::empty(
                    "median fallback with no consistent estimators",
                ));
            }
            let max_col = *consistent.iter().max().expect("non-empty");
            predictions
                .iter()
                .enumerate()
                .map(|(n, row)| {
                    if max_col >= row.len() {
                        return Err(Error::dims(
                            format!("trial {n} columns"),
                            max_col + 1,
                            row.len(),
                        ));
                    }
                    let values: Vec<f64> = consistent.iter().map(|&c| row[c]).collect();
                    median(&values)
                })
                .collect()
        }
        Aggregator::Linear { model, columns } => predictions
            .iter()
            .map(|row| match columns {
                Some(cols) => {
                    let projected: Vec<f64> = cols
                        .iter()
                        .map(|&c| {
                            row.get(c).copied().ok_or_else(|| {
                                Error::dims("projected trial columns", c + 1, row.len())
                            })
                        })
                        .collect::<Result<_>>()?;
                    model.predict(&projected)
                }
                None => model.predict(row),
            })
            .collect(),
    }
}
