//! Domain data model shared by all modules.
//!
//! A [`SubjectRecord`] holds one subject's per-trial heart-rate estimates from
//! `M` base estimators together with the `N` reference heart rates. All types
//! here are immutable after construction and safe to share across workers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject's base-estimator prediction matrix plus reference heart rates.
///
/// Invariants enforced on construction:
/// - `N >= 1`, `M >= 1`, every prediction row has exactly `M` entries;
/// - predictions are finite and `>= 0` (breakdown values such as `0` or
///   `>1000` bpm are legal data);
/// - references are finite and strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    subject_id: String,
    predictions: Vec<Vec<f64>>,
    references: Vec<f64>,
}

impl SubjectRecord {
    /// Builds a validated record. See the type docs for the invariants.
    pub fn new(
        subject_id: impl Into<String>,
        predictions: Vec<Vec<f64>>,
        references: Vec<f64>,
    ) -> Result<Self> {
        let record = SubjectRecord {
            subject_id: subject_id.into(),
            predictions,
            references,
        };
        record.validate()?;
        Ok(record)
    }

    /// Re-checks every invariant. Idempotent: a record that was accepted once
    /// is accepted again, unchanged.
    pub fn validate(&self) -> Result<()> {
        if self.predictions.is_empty() {
            return Err(Error::empty(format!(
                "subject {}: prediction matrix has no trials",
                self.subject_id
            )));
        }
        let m = self.predictions[0].len();
        if m == 0 {
            return Err(Error::empty(format!(
                "subject {}: prediction matrix has no estimator columns",
                self.subject_id
            )));
        }
        for (n, row) in self.predictions.iter().enumerate() {
            if row.len() != m {
                return Err(Error::dims(
                    format!("subject {}: prediction row {n}", self.subject_id),
                    m,
                    row.len(),
                ));
            }
            for (col, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::non_finite(format!(
                        "subject {}: prediction at trial {n}, estimator {col}",
                        self.subject_id
                    )));
                }
                if v < 0.0 {
                    return Err(Error::NegativePrediction {
                        context: format!("subject {}: trial {n}, estimator {col}", self.subject_id),
                        value: v,
                    });
                }
            }
        }
        if self.references.len() != self.predictions.len() {
            return Err(Error::dims(
                format!("subject {}: reference vector", self.subject_id),
                self.predictions.len(),
                self.references.len(),
            ));
        }
        for (n, &y) in self.references.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::non_finite(format!(
                    "subject {}: reference at trial {n}",
                    self.subject_id
                )));
            }
            if y <= 0.0 {
                return Err(Error::NonPositiveReference { trial: n, value: y });
            }
        }
        Ok(())
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    /// Number of trials `N`.
    pub fn n_trials(&self) -> usize {
        self.predictions.len()
    }

    /// Number of base estimators `M`.
    pub fn n_estimators(&self) -> usize {
        self.predictions[0].len()
    }

    /// The full N×M prediction matrix, one row per trial.
    pub fn predictions(&self) -> &[Vec<f64>] {
        &self.predictions
    }

    /// One trial's estimates from all `M` base estimators.
    pub fn trial(&self, n: usize) -> &[f64] {
        &self.predictions[n]
    }

    pub fn references(&self) -> &[f64] {
        &self.references
    }
}

/// A linear stacking model `y = w . x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// One weight per base estimator.
    pub weights: Vec<f64>,
    /// Intercept in bpm.
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, intercept: f64) -> Self {
        LinearModel { weights, intercept }
    }

    /// Evaluates `w . x + b`. Errors when `x` and the weights disagree in length.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::dims(
                "LinearModel::predict input",
                self.weights.len(),
                x.len(),
            ));
        }
        let dot: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        Ok(dot + self.intercept)
    }
}

/// Labeled/unlabeled split of a subject's trials as maintained by every
/// selection strategy.
///
/// `labeled` is ordered by selection time; `pool` holds the remaining trial
/// indices in increasing order. `labels` is either empty (selection ran
/// without querying) or aligned one-to-one with `labeled`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionState {
    pub labeled: Vec<usize>,
    pub pool: Vec<usize>,
    pub labels: Vec<f64>,
}

impl SelectionState {
    /// Builds the state from the ordered selection, deriving the pool from the
    /// total trial count.
    pub fn from_selected(selected: Vec<usize>, labels: Vec<f64>, n_trials: usize) -> Self {
        let chosen: std::collections::BTreeSet<usize> = selected.iter().copied().collect();
        let pool = (0..n_trials).filter(|i| !chosen.contains(i)).collect();
        SelectionState {
            labeled: selected,
            pool,
            labels,
        }
    }

    /// Number of labeled trials.
    pub fn k(&self) -> usize {
        self.labeled.len()
    }

    /// Checks the partition invariants against a trial count of `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.labeled.iter().chain(self.pool.iter()) {
            if i >= n {
                return Err(Error::OutOfRange {
                    what: "trial index".into(),
                    value: i,
                    min: 0,
                    max: n.saturating_sub(1),
                });
            }
            if seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "trial index {i} appears twice in selection state"
                )));
            }
            seen[i] = true;
        }
        if self.labeled.len() + self.pool.len() != n {
            return Err(Error::dims(
                "selection state partition",
                n,
                self.labeled.len() + self.pool.len(),
            ));
        }
        if !self.labels.is_empty() && self.labels.len() != self.labeled.len() {
            return Err(Error::dims(
                "selection labels",
                self.labeled.len(),
                self.labels.len(),
            ));
        }
        Ok(())
    }
}

/// Final per-trial aggregation rule produced by the active stacking pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Aggregator {
    /// Row-wise median over the base estimators that matched the queried
    /// labels; `consistent` is non-empty and holds column indices.
    MedianFallback { consistent: Vec<usize> },
    /// A trained linear stacking model. `columns` restricts the input to a
    /// subset of estimator columns; `None` means all `M` columns.
    Linear {
        model: LinearModel,
        columns: Option<Vec<usize>>,
    },
}

impl Aggregator {
    pub fn is_linear(&self) -> bool {
        matches!(self, Aggregator::Linear { .. })
    }
}

/// The estimation strategies the pipeline can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Rs,
    AsGsx,
    AsRd,
    AsRdEmcm,
    AsIgs,
    Average,
    Median,
    Loso,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Rs,
        Strategy::AsGsx,
        Strategy::AsRd,
        Strategy::AsRdEmcm,
        Strategy::AsIgs,
        Strategy::Average,
        Strategy::Median,
        Strategy::Loso,
    ];

    /// The five supervised stacking strategies, in reporting order.
    pub const SUPERVISED: [Strategy; 5] = [
        Strategy::Rs,
        Strategy::AsGsx,
        Strategy::AsRd,
        Strategy::AsRdEmcm,
        Strategy::AsIgs,
    ];

    /// Supervised strategies consume a per-subject label budget `K`;
    /// unsupervised baselines are evaluated with `K = 0`.
    pub fn is_supervised(self) -> bool {
        matches!(
            self,
            Strategy::Rs | Strategy::AsGsx | Strategy::AsRd | Strategy::AsRdEmcm | Strategy::AsIgs
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rs => "rs",
            Strategy::AsGsx => "as_gsx",
            Strategy::AsRd => "as_rd",
            Strategy::AsRdEmcm => "as_rd_emcm",
            Strategy::AsIgs => "as_igs",
            Strategy::Average => "average",
            Strategy::Median => "median",
            Strategy::Loso => "loso",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

/// One evaluated (subject, strategy, K) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub subject_id: String,
    pub strategy: Strategy,
    /// Label budget; recorded as 0 for unsupervised baselines.
    pub k: usize,
    /// Seed the cell ran with; 0 for strategies that consume no randomness.
    pub seed: u64,
    /// RMSE in bpm; `None` when the cell failed (see `error`).
    pub rmse: Option<f64>,
    pub error: Option<String>,
}

/// Per-subject, per-strategy, per-K RMSE results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub rows: Vec<EvalRow>,
}

impl EvalTable {
    /// Checks row invariants: finite non-negative RMSEs, `K >= 2` for
    /// supervised rows and `K == 0` for baseline rows.
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if let Some(rmse) = row.rmse {
                if !rmse.is_finite() {
                    return Err(Error::non_finite(format!(
                        "rmse for subject {} strategy {}",
                        row.subject_id, row.strategy
                    )));
                }
                if rmse < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "negative rmse for subject {}",
                        row.subject_id
                    )));
                }
            }
            if row.strategy.is_supervised() {
                if row.k < 2 {
                    return Err(Error::OutOfRange {
                        what: format!("K for supervised strategy {}", row.strategy),
                        value: row.k,
                        min: 2,
                        max: usize::MAX,
                    });
                }
            } else if row.k != 0 {
                return Err(Error::InvalidConfig(format!(
                    "unsupervised row for {} must record K=0, found {}",
                    row.strategy, row.k
                )));
            }
        }
        Ok(())
    }

    /// Subject ids in order of first appearance.
    pub fn subjects(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for row in &self.rows {
            if seen.insert(row.subject_id.clone()) {
                out.push(row.subject_id.clone());
            }
        }
        out
    }
}
