//! Seeded synthetic cohort generator.
//!
//! Each subject gets a baseline heart rate with bounded random-walk drift and
//! `M` estimator columns that track the reference with Gaussian noise, except
//! for occasional breakdown spikes (zero or implausibly high bpm) and, with
//! some probability, one estimator that reproduces the references exactly.
//! All values are rounded to 9 significant digits at generation time, so an
//! in-memory cohort and its CSV round-trip are bit-identical.

use serde::{Deserialize, Serialize};

use crate::domain::SubjectRecord;
use crate::error::{Error, Result};
use crate::format::round_bpm;
use crate::numerics::{derive_seed, RandomSource};

/// Synthetic cohort parameters. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_subjects: usize,
    pub trials_range: (usize, usize),
    pub n_estimators: usize,
    pub baseline_bpm: (f64, f64),
    /// Per-step standard deviation of the reference random walk.
    pub drift_sd: f64,
    /// Per-cell estimator noise standard deviation.
    pub estimator_noise_sd: f64,
    /// Per-cell probability that an estimate is replaced by a breakdown value.
    pub breakdown_prob: f64,
    /// Share of breakdowns that collapse to 0 bpm; the rest draw uniformly
    /// from `breakdown_range`.
    pub breakdown_zero_prob: f64,
    pub breakdown_range: (f64, f64),
    /// Probability that one uniformly chosen estimator column is set equal to
    /// the references.
    pub exact_estimator_prob: f64,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_subjects: 100,
            trials_range: (40, 120),
            n_estimators: 12,
            baseline_bpm: (50.0, 120.0),
            drift_sd: 3.0,
            estimator_noise_sd: 2.0,
            breakdown_prob: 0.005,
            breakdown_zero_prob: 0.5,
            breakdown_range: (1000.0, 1400.0),
            exact_estimator_prob: 0.25,
            seed: 42,
        }
    }
}

impl CohortSpec {
    /// Ten-subject variant for quick runs.
    pub fn small() -> Self {
        CohortSpec {
            n_subjects: 10,
            ..CohortSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::InvalidConfig("n_subjects must be >= 1".into()));
        }
        if self.trials_range.0 < 1 || self.trials_range.0 > self.trials_range.1 {
            return Err(Error::InvalidConfig(format!(
                "trials range {:?} is degenerate",
                self.trials_range
            )));
        }
        if self.n_estimators < 2 {
            return Err(Error::InvalidConfig("need at least 2 estimators".into()));
        }
        if !(self.baseline_bpm.0 > 0.0 && self.baseline_bpm.0 <= self.baseline_bpm.1) {
            return Err(Error::InvalidConfig(format!(
                "baseline range {:?} is degenerate",
                self.baseline_bpm
            )));
        }
        for (name, v) in [
            ("breakdown_prob", self.breakdown_prob),
            ("breakdown_zero_prob", self.breakdown_zero_prob),
            ("exact_estimator_prob", self.exact_estimator_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be in [0, 1], got {v}"
                )));
            }
        }
        for (name, v) in [
            ("drift_sd", self.drift_sd),
            ("estimator_noise_sd", self.estimator_noise_sd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.breakdown_range.0 >= 0.0 && self.breakdown_range.0 <= self.breakdown_range.1) {
            return Err(Error::InvalidConfig(format!(
                "breakdown range {:?} is degenerate",
                self.breakdown_range
            )));
        }
        Ok(())
    }
}

/// Generates the cohort. Deterministic given the cohort spec: each subject draws
/// from its own stream derived from `(seed, subject index)`.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Vec<SubjectRecord>> {
    spec.validate()?;
    (0..spec.n_subjects)
        .map(|i| generate_subject(spec, i))
        .collect()
}

fn generate_subject(spec: &CohortSpec, index: usize) -> Result<SubjectRecord> {
    let mut rng = RandomSource::new(derive_seed(spec.seed, &["subject", &index.to_string()]));
    let (lo, hi) = spec.trials_range;
    let n = lo + rng.next_usize(hi - lo + 1);
    let m = spec.n_estimators;

    let baseline =
        spec.baseline_bpm.0 + rng.next_f64() * (spec.baseline_bpm.1 - spec.baseline_bpm.0);
    let mut references = Vec::with_capacity(n);
    let mut current = baseline;
    for _ in 0..n {
        references.push(current);
        current = (current + spec.drift_sd * rng.next_normal()).clamp(30.0, 220.0);
    }

    let mut predictions = vec![vec![0.0; m]; n];
    for t in 0..n {
        for e in 0..m {
            predictions[t][e] = if rng.next_f64() < spec.breakdown_prob {
                if rng.next_f64() < spec.breakdown_zero_prob {
                    0.0
                } else {
                    spec.breakdown_range.0
                        + rng.next_f64() * (spec.breakdown_range.1 - spec.breakdown_range.0)
                }
            } else {
                (references[t] + spec.estimator_noise_sd * rng.next_normal()).max(0.0)
            };
        }
    }
    if rng.next_f64() < spec.exact_estimator_prob {
        let exact = rng.next_usize(m);
        for t in 0..n {
            predictions[t][exact] = references[t];
        }
    }

    for y in &mut references {
        *y = round_bpm(*y);
    }
    for row in &mut predictions {
        for v in row {
            *v = round_bpm(*v);
        }
    }
    SubjectRecord::new(format!("subject_{index:03}"), predictions, references)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::aggregate_median;
    use crate::pipeline::rmse;

    #[test]
    fn generated_records_validate_and_are_deterministic() {
        let spec = CohortSpec {
            n_subjects: 5,
            ..CohortSpec::default()
        };
        let a = generate_cohort(&spec).unwrap();
        let b = generate_cohort(&spec).unwrap();
        assert_eq!(a, b);
        for record in &a {
            record.validate().unwrap();
            assert!(record.n_trials() >= 40 && record.n_trials() <= 120);
            assert_eq!(record.n_estimators(), 12);
        }
    }

    #[test]
    fn noiseless_cohort_has_zero_median_rmse() {
        let spec = CohortSpec {
            n_subjects: 3,
            breakdown_prob: 0.0,
            estimator_noise_sd: 0.0,
            exact_estimator_prob: 0.0,
            ..CohortSpec::default()
        };
        for record in generate_cohort(&spec).unwrap() {
            let estimates = aggregate_median(record.predictions());
            assert_eq!(rmse(&estimates, record.references()).unwrap(), 0.0);
        }
    }

    #[test]
    fn exact_estimator_probability_one_plants_a_perfect_column() {
        let spec = CohortSpec {
            n_subjects: 4,
            exact_estimator_prob: 1.0,
            ..CohortSpec::default()
        };
        for record in generate_cohort(&spec).unwrap() {
            let m = record.n_estimators();
            let perfect = (0..m).any(|col| {
                record
                    .predictions()
                    .iter()
                    .zip(record.references())
                    .all(|(row, &y)| row[col] == y)
            });
            assert!(perfect, "no exact estimator in {}", record.subject_id());
        }
    }

    #[test]
    fn breakdown_frequency_within_three_sigma() {
        let spec = CohortSpec {
            n_subjects: 40,
            breakdown_prob: 0.05,
            exact_estimator_prob: 0.0,
            ..CohortSpec::default()
        };
        let cohort = generate_cohort(&spec).unwrap();
        let mut cells = 0usize;
        let mut breakdowns = 0usize;
        for record in &cohort {
            for row in record.predictions() {
                for &v in row {
                    cells += 1;
                    if v == 0.0 || v >= spec.breakdown_range.0 {
                        breakdowns += 1;
                    }
                }
            }
        }
        let p = spec.breakdown_prob;
        let sigma = (cells as f64 * p * (1.0 - p)).sqrt();
        let dev = (breakdowns as f64 - cells as f64 * p).abs();
        assert!(
            dev <= 3.0 * sigma,
            "breakdowns {breakdowns} of {cells}, dev {dev}"
        );
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(CohortSpec {
            n_subjects: 0,
            ..CohortSpec::default()
        }
        .validate()
        .is_err());
        assert!(CohortSpec {
            trials_range: (5, 3),
            ..CohortSpec::default()
        }
        .validate()
        .is_err());
        assert!(CohortSpec {
            n_estimators: 1,
            ..CohortSpec::default()
        }
        .validate()
        .is_err());
        assert!(CohortSpec {
            breakdown_prob: 1.5,
            ..CohortSpec::default()
        }
        .validate()
        .is_err());
        assert!(CohortSpec {
            drift_sd: -1.0,
            ..CohortSpec::default()
        }
        .validate()
        .is_err());
    }
}
