//! Deterministic numerical primitives: distances, order statistics, bootstrap
//! resampling, k-means, and the seeded random source.
//!
//! Ties are always broken toward the smallest index so every operation is
//! reproducible across platforms.

mod kmeans;
mod rng;

pub use kmeans::{kmeans, kmeans_traced, kmeans_with, Clustering, KmeansConfig};
pub use rng::{derive_seed, RandomSource};

use crate::error::{Error, Result};

/// Euclidean distance between two equal-length vectors.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dims("distance operands", a.len(), b.len()));
    }
    Ok(distance_sq(a, b).sqrt())
}

/// Squared Euclidean distance; lengths must already agree.
pub(crate) fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Minimum Euclidean distance from `x` to the members of `set`, plus the
/// argmin index. Ties go to the smallest index.
pub fn min_distance_to_set(x: &[f64], set: &[Vec<f64>]) -> Result<(f64, usize)> {
    if set.is_empty() {
        return Err(Error::empty("min_distance_to_set over an empty set"));
    }
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (i, member) in set.iter().enumerate() {
        let d = distance(x, member)?;
        if d < best {
            best = d;
            arg = i;
        }
    }
    Ok((best, arg))
}

/// Coordinate-wise mean of a non-empty point list.
pub(crate) fn mean_point(points: &[&[f64]]) -> Vec<f64> {
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (acc, v) in mean.iter_mut().zip(p.iter()) {
            *acc += v;
        }
    }
    let n = points.len() as f64;
    for v in &mut mean {
        *v /= n;
    }
    mean
}

/// Index of the point closest to the centroid of all points; ties go to the
/// smallest index.
pub fn nearest_to_centroid(points: &[Vec<f64>]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::empty("nearest_to_centroid over an empty list"));
    }
    let rows: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    let centroid = mean_point(&rows);
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (i, p) in points.iter().enumerate() {
        let d = distance_sq(p, &centroid);
        if d < best {
            best = d;
            arg = i;
        }
    }
    Ok(arg)
}

/// `n` indices drawn uniformly with replacement from `[0, n)`.
pub fn bootstrap_indices(n: usize, rng: &mut RandomSource) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::empty("bootstrap over zero items"));
    }
    Ok((0..n).map(|_| rng.next_usize(n)).collect())
}

/// Middle order statistic; for even lengths, the mean of the two middle
/// values.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::empty("median of an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}
