//! Active-learning-driven stacking of heart-rate base estimators.
//!
//! The crate evaluates how well a handful of labeled ECG trials, chosen by an
//! active-learning strategy, can train a linear stacking model that aggregates
//! `M` unreliable per-trial heart-rate estimates into one estimate per trial.
//! It ships:
//!
//! - unsupervised mean/median aggregation and a leave-one-subject-out ridge
//!   baseline ([`ensemble`], [`pipeline`]);
//! - five trial-selection strategies: random, greedy input-space sampling,
//!   cluster representatives, cluster + expected-model-change, and greedy
//!   input/output-space sampling ([`alr`]);
//! - ridge and linear SVR stacking fits ([`regressors`]);
//! - a consistent-estimator median fallback with its Median/Subset/All
//!   variants ([`ensemble`]);
//! - K-sweep evaluation harnesses and Dunn's multiple-comparison test with
//!   Benjamini-Hochberg correction ([`pipeline`], [`stats`]);
//! - a seeded synthetic cohort generator and CSV/report formats ([`datagen`],
//!   [`mod@format`]).
//!
//! Everything is deterministic given the seeds; see [`numerics::RandomSource`]
//! for the documented generator contract.
//!
//! ```
//! use activestack::datagen::{generate_cohort, CohortSpec};
//! use activestack::domain::Strategy;
//! use activestack::pipeline::{run_subject, RunConfig};
//!
//! let cohort = generate_cohort(&CohortSpec {
//!     n_subjects: 1,
//!     trials_range: (30, 30),
//!     seed: 7,
//!     ..CohortSpec::default()
//! })?;
//! let run = run_subject(
//!     &cohort[0],
//!     &RunConfig {
//!         strategy: Strategy::AsGsx,
//!         k: 3,
//!         ..RunConfig::default()
//!     },
//! )?;
//! assert_eq!(run.selection.labeled.len(), 3);
//! assert_eq!(run.estimates.len(), 27); // pool-only scope scores N - K trials
//! assert!(run.rmse.is_finite());
//! # Ok::<(), activestack::Error>(())
//! ```

// Index-based loops are the clearer form for the matrix arithmetic here.
#![allow(clippy::needless_range_loop)]

pub mod alr;
pub mod datagen;
pub mod domain;
pub mod ensemble;
mod error;
pub mod format;
pub mod numerics;
pub mod pipeline;
pub mod regressors;
pub mod stats;

pub use error::{Error, Result};

pub use domain::{
    Aggregator, EvalRow, EvalTable, LinearModel, SelectionState, Strategy, SubjectRecord,
};
