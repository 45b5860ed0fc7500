//! Nonparametric multiple pairwise comparisons: Dunn's procedure on pooled
//! rank sums with Benjamini-Hochberg false-discovery-rate correction.
//!
//! Observations from all groups are pooled and mid-ranked (ties share the
//! average rank); the pairwise z statistic divides the mean-rank difference by
//! the tie-corrected standard error, two-sided p-values come from the normal
//! distribution, and the step-up BH procedure corrects across all pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise comparison results over `g` groups. Matrices are `g x g`,
/// symmetric, with `NaN` on the diagonal (serialized as `null`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub names: Vec<String>,
    #[serde(deserialize_with = "nullable_matrix")]
    pub raw_p: Vec<Vec<f64>>,
    #[serde(deserialize_with = "nullable_matrix")]
    pub corrected_p: Vec<Vec<f64>>,
    /// `corrected_p < alpha`, false on the diagonal.
    pub significant: Vec<Vec<bool>>,
    pub alpha: f64,
}

/// JSON has no NaN; `null` entries come back as NaN.
fn nullable_matrix<'de, D>(deserializer: D) -> std::result::Result<Vec<Vec<f64>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw: Vec<Vec<Option<f64>>> = Deserialize::deserialize(deserializer)?;
    Ok(raw
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
        .collect())
}

impl ComparisonMatrix {
    pub fn n_groups(&self) -> usize {
        self.names.len()
    }
}

/// Dunn's test with FDR correction over equally sized groups.
pub fn dunn_fdr(groups: &[Vec<f64>], names: &[String], alpha: f64) -> Result<ComparisonMatrix> {
    let g = groups.len();
    if g < 2 {
        return Err(Error::InvalidConfig(format!(
            "Dunn's test needs at least 2 groups, got {g}"
        )));
    }
    if names.len() != g {
        return Err(Error::dims("group names", g, names.len()));
    }
    let size = groups[0].len();
    for (i, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::empty(format!("comparison group {i}")));
        }
        if group.len() != size {
            return Err(Error::dims(format!("group {i} size"), size, group.len()));
        }
        if group.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite(format!("comparison group {i}")));
        }
    }
    if size < 2 {
        return Err(Error::InvalidConfig(
            "Dunn's test needs at least 2 observations per group".into(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }

    let n_total = g * size;
    // Pool, mid-rank, and accumulate per-group rank sums.
    let mut pooled: Vec<(f64, usize)> = Vec::with_capacity(n_total);
    for (gi, group) in groups.iter().enumerate() {
        pooled.extend(group.iter().map(|&v| (v, gi)));
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sums = vec![0.0; g];
    let mut tie_term = 0.0; // sum of (t^3 - t) over tie runs
    let mut i = 0;
    while i < n_total {
        let mut j = i;
        while j < n_total && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let run = j - i;
        // Mid-rank of a run spanning 1-based ranks i+1..=j.
        let mid = (i + 1 + j) as f64 / 2.0;
        for item in &pooled[i..j] {
            rank_sums[item.1] += mid;
        }
        if run > 1 {
            let t = run as f64;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    let n = n_total as f64;
    let tie_correction = tie_term / (12.0 * (n - 1.0));
    let variance_base = n * (n + 1.0) / 12.0 - tie_correction;

    let mut raw = vec![vec![f64::NAN; g]; g];
    let mut pairs = Vec::with_capacity(g * (g - 1) / 2);
    for a in 0..g {
        for b in (a + 1)..g {
            let mean_a = rank_sums[a] / size as f64;
            let mean_b = rank_sums[b] / size as f64;
            let se = (variance_base * (1.0 / size as f64 + 1.0 / size as f64)).sqrt();
            let p = if se > 0.0 {
                let z = (mean_a - mean_b) / se;
                two_sided_normal_p(z)
            } else {
                // All observations identical: no evidence of a difference.
                1.0
            };
            raw[a][b] = p;
            raw[b][a] = p;
            pairs.push((a, b, p));
        }
    }

    let corrected_values =
        benjamini_hochberg(&pairs.iter().map(|&(_, _, p)| p).collect::<Vec<_>>());
    let mut corrected = vec![vec![f64::NAN; g]; g];
    let mut significant = vec![vec![false; g]; g];
    for (&(a, b, _), &q) in pairs.iter().zip(&corrected_values) {
        corrected[a][b] = q;
        corrected[b][a] = q;
        significant[a][b] = q < alpha;
        significant[b][a] = q < alpha;
    }

    Ok(ComparisonMatrix {
        names: names.to_vec(),
        raw_p: raw,
        corrected_p: corrected,
        significant,
        alpha,
    })
}

/// Benjamini-Hochberg step-up adjustment; preserves the input order.
pub fn benjamini_hochberg(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running_min = 1.0f64;
    for rank in (0..m).rev() {
        let idx = order[rank];
        let q = (p_values[idx] * m as f64 / (rank + 1) as f64).min(1.0);
        running_min = running_min.min(q);
        adjusted[idx] = running_min;
    }
    adjusted
}

/// Two-sided p-value for a standard normal statistic: `2 * (1 - Phi(|z|))`,
/// computed via the complementary error function.
fn two_sided_normal_p(z: f64) -> f64 {
    (erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0)
}

/// Complementary error function via the regularized incomplete gamma
/// function `Q(1/2, x^2)`: a power series below the crossover and a Lentz
/// continued fraction above it, both iterated to near machine precision.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let a = 0.5;
    let z = x * x;
    if z == 0.0 {
        return 1.0;
    }
    let ln_gamma_half = std::f64::consts::PI.sqrt().ln();
    let prefactor = (-z + a * z.ln() - ln_gamma_half).exp();
    if z < a + 1.0 {
        // Series for P(a, z); erfc = 1 - P.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..300 {
            denom += 1.0;
            term *= z / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * prefactor
    } else {
        // Modified Lentz continued fraction for Q(a, z).
        let tiny = 1e-300;
        let mut b = z + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..300 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        prefactor * h
    }
}
