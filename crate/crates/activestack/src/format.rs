//! File formats: per-subject CSV matrices, the flat results CSV, and the
//! machine-readable report document.
//!
//! All numeric output is written with 9 significant digits in plain decimal,
//! which makes round-trips bit-exact and cross-run diffs stable. A subject
//! file has a `ref,est_1,...,est_M` header and one row per trial; the subject
//! id is the file stem.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{EvalRow, EvalTable, Strategy, SubjectRecord};
use crate::error::{Error, Result};
use crate::stats::ComparisonMatrix;

/// Formats a finite value with 9 significant digits, plain decimal notation.
pub fn fmt_bpm(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp > 8 {
        // Integer part alone exceeds 9 digits; round in units of 10^(exp-8).
        let unit = 10f64.powi(exp - 8);
        return format!("{:.0}", (x / unit).round() * unit);
    }
    let decimals = (8 - exp) as usize;
    let first = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (999.9999995 -> 1000.0...);
    // re-derive the exponent from the rounded value.
    let rounded: f64 = first.parse().expect("formatted float");
    if rounded == 0.0 {
        return "0".to_string();
    }
    let exp2 = rounded.abs().log10().floor() as i32;
    if exp2 == exp {
        first
    } else if exp2 > 8 {
        format!("{rounded:.0}")
    } else {
        let decimals = (8 - exp2) as usize;
        format!("{rounded:.decimals$}")
    }
}

/// Nearest value representable with 9 significant decimal digits.
pub fn round_bpm(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_bpm(x).parse().expect("formatted float")
}

/// Serializes one subject to the CSV subject format.
pub fn subject_to_csv(record: &SubjectRecord) -> String {
    let m = record.n_estimators();
    let mut out = String::from("ref");
    for i in 1..=m {
        out.push_str(&format!(",est_{i}"));
    }
    out.push('\n');
    for (row, &y) in record.predictions().iter().zip(record.references()) {
        out.push_str(&fmt_bpm(y));
        for v in row {
            out.push(',');
            out.push_str(&fmt_bpm(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV subject format. `file` labels diagnostics; `subject_id`
/// becomes the record id (callers pass the file stem).
pub fn parse_subject_csv(subject_id: &str, file: &str, content: &str) -> Result<SubjectRecord> {
    let parse_err = |line: usize, message: String| Error::Parse {
        file: file.to_string(),
        line,
        message,
    };

    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".to_string()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"ref") {
        return Err(parse_err(
            1,
            format!("header must start with `ref`, found `{header}`"),
        ));
    }
    let m = columns.len() - 1;
    if m == 0 {
        return Err(parse_err(1, "header has no estimator columns".to_string()));
    }
    for (i, col) in columns.iter().enumerate().skip(1) {
        let expected = format!("est_{i}");
        if *col != expected {
            return Err(parse_err(
                1,
                format!("expected column `{expected}`, found `{col}`"),
            ));
        }
    }

    let mut references = Vec::new();
    let mut predictions = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != m + 1 {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, found {}", m + 1, fields.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(m + 1);
        for (ci, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                parse_err(
                    line_no,
                    format!("column {} is not a number: `{field}`", ci + 1),
                )
            })?;
            parsed.push(value);
        }
        references.push(parsed[0]);
        predictions.push(parsed[1..].to_vec());
    }
    if predictions.is_empty() {
        return Err(parse_err(1, "no data rows".to_string()));
    }
    SubjectRecord::new(subject_id, predictions, references).map_err(|e| Error::Parse {
        file: file.to_string(),
        line: 0,
        message: e.to_string(),
    })
}

/// Reads one subject file; the subject id is the file stem.
pub fn load_subject_file(path: &Path) -> Result<SubjectRecord> {
    let content = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidConfig(format!("unusable file name: {}", path.display())))?;
    parse_subject_csv(stem, &path.display().to_string(), &content)
}

/// Loads a cohort from one CSV file or a directory of CSV files (sorted by
/// file name for a stable subject order).
pub fn load_cohort(path: &Path) -> Result<Vec<SubjectRecord>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::empty(format!(
                "no .csv files under {}",
                path.display()
            )));
        }
        files.iter().map(|p| load_subject_file(p)).collect()
    } else {
        Ok(vec![load_subject_file(path)?])
    }
}

/// Writes one CSV per subject into `dir`, named `<subject_id>.csv`.
pub fn write_cohort(dir: &Path, records: &[SubjectRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(records.len());
    for record in records {
        let path = dir.join(format!("{}.csv", record.subject_id()));
        let mut file = fs::File::create(&path)?;
        file.write_all(subject_to_csv(record).as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}

const EVAL_HEADER: &str = "subject_id,strategy,k,seed,rmse,error";

/// Flat CSV of an evaluation table, one row per (subject, strategy, K) cell.
pub fn eval_table_to_csv(table: &EvalTable) -> String {
    let mut out = String::from(EVAL_HEADER);
    out.push('\n');
    for row in &table.rows {
        let rmse = row.rmse.map(fmt_bpm).unwrap_or_default();
        // Keep the flat file trivially splittable.
        let error = row.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.subject_id, row.strategy, row.k, row.seed, rmse, error
        ));
    }
    out
}

/// Parses the flat results CSV back into an evaluation table.
pub fn parse_eval_table_csv(file: &str, content: &str) -> Result<EvalTable> {
    let parse_err = |line: usize, message: String| Error::Parse {
        file: file.to_string(),
        line,
        message,
    };
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".to_string()))?;
    if header.trim() != EVAL_HEADER {
        return Err(parse_err(1, format!("expected header `{EVAL_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(
                line_no,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let strategy: Strategy = fields[1]
            .parse()
            .map_err(|e: Error| parse_err(line_no, e.to_string()))?;
        let k: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad K `{}`", fields[2])))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad seed `{}`", fields[3])))?;
        let rmse = if fields[4].is_empty() {
            None
        } else {
            Some(
                fields[4]
                    .parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad rmse `{}`", fields[4])))?,
            )
        };
        let error = if fields[5].is_empty() {
            None
        } else {
            Some(fields[5].to_string())
        };
        rows.push(EvalRow {
            subject_id: fields[0].to_string(),
            strategy,
            k,
            seed,
            rmse,
            error,
        });
    }
    Ok(EvalTable { rows })
}

/// Per-(strategy, K) summary across subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub k: usize,
    pub mean_rmse: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single subject.
    pub std_rmse: f64,
    pub n_subjects: usize,
}

/// Mean-RMSE ratio of one strategy to the RS baseline at the same K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub strategy: Strategy,
    pub k: usize,
    pub ratio_to_rs: f64,
}

/// The machine-readable results document emitted by `run`. Contains no
/// timestamps: re-running with the echoed configuration reproduces the
/// document byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: ReportConfig,
    pub summaries: Vec<SummaryRow>,
    pub rs_ratios: Vec<RatioRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparisons: Option<ComparisonMatrix>,
    pub table: Vec<EvalRow>,
}

/// Fully resolved configuration echo: defaults made explicit so a run can be
/// reproduced from its own report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportConfig {
    pub data_source: String,
    pub strategies: Vec<Strategy>,
    pub k_range: (usize, usize),
    pub seed: u64,
    pub fallback_variant: String,
    pub match_tolerance: f64,
    pub rmse_scope: String,
    pub rs_repeats: usize,
    pub svr_c: f64,
    pub svr_tube: f64,
    pub svr_tol: f64,
    pub svr_max_iter: usize,
    pub ridge_lambda: f64,
    pub emcm_committee_size: usize,
    pub stats_k_window: (usize, usize),
    pub alpha: f64,
}
