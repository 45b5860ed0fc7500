//! Lloyd's k-means with k-means++ seeding.
//!
//! All tie-breaking is "smallest index wins" so clusterings are reproducible
//! across platforms given the seed. Empty clusters are repaired by promoting
//! the point farthest from its assigned centroid to a centroid of its own, so
//! the result always has exactly `k` non-empty clusters. The repair re-seats
//! the centroid on the promoted point, which keeps inertia non-increasing
//! across iterations.

use crate::error::{Error, Result};
use crate::numerics::rng::RandomSource;
use crate::numerics::{distance_sq, mean_point};

/// Result of one k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster id per point, each in `[0, k)`.
    pub assignments: Vec<usize>,
    /// `k` centroids; every non-empty cluster's centroid is the mean of its
    /// assigned points.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from points to assigned centroids.
    pub inertia: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Point indices assigned to `cluster`, in increasing order.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Tuning knobs for [`kmeans`]. The defaults are robust for the small
/// instances this crate clusters (at most a few hundred trials).
#[derive(Debug, Clone)]
pub struct KmeansConfig {
    pub max_iter: usize,
    pub n_restarts: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            max_iter: 300,
            n_restarts: 10,
        }
    }
}

/// Runs k-means with default configuration; see [`kmeans_with`].
pub fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut RandomSource) -> Result<Clustering> {
    kmeans_with(points, k, rng, &KmeansConfig::default())
}

/// Lloyd's algorithm with k-means++ seeding, restarted `n_restarts` times;
/// returns the run with the lowest inertia (ties keep the earlier run).
/// Deterministic given `(points, k, seed)`.
pub fn kmeans_with(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut RandomSource,
    cfg: &KmeansConfig,
) -> Result<Clustering> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::OutOfRange {
            what: "k for k-means".into(),
            value: k,
            min: 1,
            max: n,
        });
    }
    let mut best: Option<Clustering> = None;
    for _ in 0..cfg.n_restarts.max(1) {
        let (run, _) = lloyd_once(points, k, rng, cfg.max_iter);
        let better = match &best {
            None => true,
            Some(b) => run.inertia < b.inertia,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Single seeded Lloyd run that also returns the per-iteration inertia trace
/// (recorded after each centroid update). The trace is non-increasing.
pub fn kmeans_traced(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut RandomSource,
    max_iter: usize,
) -> Result<(Clustering, Vec<f64>)> {
    if k == 0 || k > points.len() {
        return Err(Error::OutOfRange {
            what: "k for k-means".into(),
            value: k,
            min: 1,
            max: points.len(),
        });
    }
    Ok(lloyd_once(points, k, rng, max_iter))
}

fn lloyd_once(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut RandomSource,
    max_iter: usize,
) -> (Clustering, Vec<f64>) {
    let n = points.len();
    let mut centroids = seed_plus_plus(points, k, rng);
    let mut assignments = vec![usize::MAX; n];
    let mut trace = Vec::new();

    for _ in 0..max_iter {
        let mut new_assignments: Vec<usize> = points
            .iter()
            .map(|p| nearest_centroid(p, &centroids))
            .collect();
        let mut counts = vec![0usize; k];
        for &c in &new_assignments {
            counts[c] += 1;
        }
        repair_empty_clusters(points, &mut centroids, &mut new_assignments, &mut counts);
        let converged = new_assignments == assignments;
        assignments = new_assignments;
        centroids = recompute_centroids(points, &assignments, k, &centroids);
        trace.push(inertia_of(points, &assignments, &centroids));
        if converged {
            break;
        }
    }

    let inertia = inertia_of(points, &assignments, &centroids);
    (
        Clustering {
            assignments,
            centroids,
            inertia,
        },
        trace,
    )
}

fn inertia_of(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &c)| distance_sq(&points[i], &centroids[c]))
        .sum()
}

/// k-means++ seeding: first centroid uniform, later centroids drawn with
/// probability proportional to squared distance from the nearest chosen one.
/// When every remaining point coincides with a chosen centroid the draw
/// degenerates; the smallest unchosen index is taken instead.
fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut RandomSource) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    chosen.push(rng.next_usize(n));
    let mut dist2: Vec<f64> = points
        .iter()
        .map(|p| distance_sq(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let r = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                acc += d;
                if r < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All mass is zero: duplicates of the chosen set. Take the
            // smallest index not yet chosen.
            (0..n)
                .find(|i| !chosen.contains(i))
                .expect("k <= n leaves an unchosen point")
        };
        chosen.push(next);
        for (i, d) in dist2.iter_mut().enumerate() {
            let nd = distance_sq(&points[i], &points[next]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    chosen.iter().map(|&i| points[i].clone()).collect()
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = distance_sq(p, &centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = distance_sq(p, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Promotes the point farthest from its assigned centroid into each empty
/// cluster (increasing cluster id order) and re-seats that cluster's centroid
/// on the point. Points are never taken from singleton clusters, so every
/// cluster ends non-empty when `k <= n`.
fn repair_empty_clusters(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assignments: &mut [usize],
    counts: &mut [usize],
) {
    for empty in 0..counts.len() {
        if counts[empty] > 0 {
            continue;
        }
        let mut far_idx = usize::MAX;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let c = assignments[i];
            if counts[c] <= 1 {
                continue;
            }
            let d = distance_sq(p, &centroids[c]);
            if d > far_d {
                far_d = d;
                far_idx = i;
            }
        }
        let donor = assignments[far_idx];
        counts[donor] -= 1;
        assignments[far_idx] = empty;
        counts[empty] = 1;
        centroids[empty] = points[far_idx].clone();
    }
}

/// Means of the assigned points; every cluster is non-empty after repair.
fn recompute_centroids(
    points: &[Vec<f64>],
    assignments: &[usize],
    k: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<&[f64]> = assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == c)
            .map(|(i, _)| points[i].as_slice())
            .collect();
        if members.is_empty() {
            out.push(previous[c].clone());
        } else {
            out.push(mean_point(&members));
        }
    }
    out
}
