use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

const MAX_ITERATIONS: usize = 300;
const SHIFT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(points: &[f64], dim: usize, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let m = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centroids = vec![row(rng.random_range(0..m)).to_vec()];
    let mut best: Vec<f64> = (0..m).map(|i| sq(row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = best.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in best.iter().enumerate() {
                if r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        let c = row(pick).to_vec();
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(sq(row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &[f64], dim: usize, mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let m = points.len() / dim;
    let k = centroids.len();
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut labels = vec![0usize; m];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut inertia = 0.0;
        for (i, label) in labels.iter_mut().enumerate() {
            let (best, d) = centroids
                .iter()
                .enumerate()
                .map(|(c, cen)| (c, sq(row(i), cen)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            *label = best;
            inertia += d;
        }
        history.push(inertia);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(row(i)) {
                *s += x;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    let inertia = (0..m).map(|i| sq(row(i), &centroids[labels[i]])).sum();
    KMeansResult {
        labels,
        centroids,
        inertia,
        inertia_history: history,
    }
}

/// One k-means++ initialised Lloyd run.
pub fn kmeans_single(points: &[f64], dim: usize, k: usize, seed: u64) -> Result<KMeansResult> {
    check(points, dim, k)?;
    let mut rng = seed::rng(seed);
    Ok(lloyd(points, dim, plus_plus_init(points, dim, k, &mut rng)))
}

fn check(points: &[f64], dim: usize, k: usize) -> Result<()> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::invalid("point data is not a whole number of rows"));
    }
    if k == 0 || points.len() / dim < k {
        return Err(Error::invalid(format!(
            "cannot form {k} clusters from {} points",
            points.len() / dim
        )));
    }
    Ok(())
}

/// Best of `restarts` runs by inertia; restart `r` uses a seed derived from `(seed, r)`.
pub fn kmeans(points: &[f64], dim: usize, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    check(points, dim, k)?;
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts.max(1) {
        let run = kmeans_single(points, dim, k, seed::derive_index(seed, r as u64))?;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
