//! Exact t-SNE to two dimensions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
    /// Defaults to `max(m / exaggeration / 4, 50)`.
    pub learning_rate: Option<f64>,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub points: Vec<[f64; 2]>,
    /// (iteration, KL(P || Q)) after the exaggeration phase.
    pub kl_history: Vec<(usize, f64)>,
}

fn squared_distances(data: &[f64], m: usize, d: usize) -> Vec<f64> {
    let rows = par::map_range(m, |i| {
        let xi = &data[i * d..(i + 1) * d];
        (0..m)
            .map(|j| {
                let xj = &data[j * d..(j + 1) * d];
                xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    rows.concat()
}

/// Row `i` of the conditional affinity matrix, with the precision found by
/// bisection so the row entropy matches `ln(perplexity)`.
fn conditional_row(dist: &[f64], i: usize, target_entropy: f64) -> Vec<f64> {
    let m = dist.len();
    let (mut beta, mut lo, mut hi) = (1.0f64, 0.0f64, f64::INFINITY);
    let mut p = vec![0.0; m];
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mut sum = 0.0;
        for j in 0..m {
            p[j] = if j == i { 0.0 } else { (-(dist[j] - dmin) * beta).exp() };
            sum += p[j];
        }
        let mut weighted = 0.0;
        for j in 0..m {
            p[j] /= sum;
            weighted += p[j] * (dist[j] - dmin);
        }
        let entropy = sum.ln() + beta * weighted;
        let diff = entropy - target_entropy;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    p
}

fn joint_affinities(data: &[f64], m: usize, d: usize, perplexity: f64) -> Vec<f64> {
    let dist = squared_distances(data, m, d);
    let target = perplexity.ln();
    let rows = par::map_range(m, |i| conditional_row(&dist[i * m..(i + 1) * m], i, target));
    let mut p = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            p[i * m + j] = ((rows[i][j] + rows[j][i]) / (2.0 * m as f64)).max(1e-12);
        }
        p[i * m + i] = 0.0;
    }
    p
}

/// Student-t kernel values and their sum over i != j.
fn kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let m = y.len();
    let rows = par::map_range(m, |i| {
        (0..m)
            .map(|j| {
                if i == j {
                    0.0
                } else {
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    1.0 / (1.0 + dx * dx + dy * dy)
                }
            })
            .collect::<Vec<f64>>()
    });
    let num = rows.concat();
    let sum = num.iter().sum();
    (num, sum)
}

pub fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let (num, sum) = kernel(y);
    kl_from_kernel(p, &num, sum)
}

fn kl_from_kernel(p: &[f64], num: &[f64], sum: f64) -> f64 {
    p.iter()
        .zip(num)
        .filter(|(&pij, _)| pij > 0.0)
        .map(|(&pij, &n)| pij * (pij / (n / sum).max(1e-300)).ln())
        .sum()
}

pub fn tsne_2d(data: &[f64], m: usize, d: usize, cfg: &TsneConfig) -> Result<TsneOutput> {
    if data.len() != m * d {
        return Err(Error::DimensionMismatch {
            expected: m * d,
            actual: data.len(),
        });
    }
    if !(cfg.perplexity > 0.0) || (m as f64) < 3.0 * cfg.perplexity {
        return Err(Error::Config(format!(
            "perplexity {} infeasible for {m} points (needs m >= 3 * perplexity)",
            cfg.perplexity
        )));
    }
    let p = joint_affinities(data, m, d, cfg.perplexity);
    let lr = cfg
        .learning_rate
        .unwrap_or_else(|| (m as f64 / cfg.exaggeration / 4.0).max(50.0));
    let mut rng = seed::rng(cfg.seed);
    let mut y: Vec<[f64; 2]> = (0..m)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            [1e-4 * a, 1e-4 * b]
        })
        .collect();
    let mut update = vec![[0.0f64; 2]; m];
    let mut gains = vec![[1.0f64; 2]; m];
    let mut kl_history = Vec::new();
    // Step scale for the post-exaggeration phase, where a step that raises
    // the objective is rejected and the velocity dropped.
    let mut scale = 1.0f64;
    let (mut num, mut sum) = kernel(&y);

    for it in 0..cfg.iterations {
        let exaggerating = it < cfg.exaggeration_iterations;
        let ex = if exaggerating { cfg.exaggeration } else { 1.0 };
        let momentum = if exaggerating { 0.5 } else { 0.8 };
        if it == cfg.exaggeration_iterations {
            // Velocity built up against the exaggerated affinities points the
            // wrong way once they are lifted.
            update.iter_mut().for_each(|u| *u = [0.0; 2]);
            gains.iter_mut().for_each(|g| *g = [1.0; 2]);
        }
        let current_kl = (!exaggerating).then(|| kl_from_kernel(&p, &num, sum));
        if let Some(kl) = current_kl {
            kl_history.push((it, kl));
        }
        let grads = par::map_range(m, |i| {
            let mut g = [0.0f64; 2];
            for j in 0..m {
                let n = num[i * m + j];
                let w = (ex * p[i * m + j] - n / sum) * n;
                g[0] += w * (y[i][0] - y[j][0]);
                g[1] += w * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        });
        let mut next_update = update.clone();
        let mut next_gains = gains.clone();
        let mut candidate = y.clone();
        for i in 0..m {
            for k in 0..2 {
                let same_sign = (grads[i][k] > 0.0) == (update[i][k] > 0.0);
                let g = if same_sign { gains[i][k] * 0.8 } else { gains[i][k] + 0.2 };
                next_gains[i][k] = g.max(0.01);
                next_update[i][k] =
                    momentum * update[i][k] - scale * lr * next_gains[i][k] * grads[i][k];
                candidate[i][k] += next_update[i][k];
            }
        }
        let (cx, cy) = candidate.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        for p in candidate.iter_mut() {
            p[0] -= cx / m as f64;
            p[1] -= cy / m as f64;
        }
        if candidate.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::numeric("t-SNE diverged"));
        }
        let (cand_num, cand_sum) = kernel(&candidate);
        if let Some(kl) = current_kl {
            if kl_from_kernel(&p, &cand_num, cand_sum) > kl {
                update.iter_mut().for_each(|u| *u = [0.0; 2]);
                scale *= 0.5;
                continue;
            }
            scale = (scale * 1.1).min(1.0);
        }
        y = candidate;
        update = next_update;
        gains = next_gains;
        num = cand_num;
        sum = cand_sum;
    }
    Ok(TsneOutput {
        points: y,
        kl_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n_per: usize, seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(seed);
        let mut data = Vec::new();
        for c in 0..2 {
            for _ in 0..n_per {
                for k in 0..10 {
                    let centre = if c == 0 { 0.0 } else if k == 0 { 10.0 } else { 0.0 };
                    let z: f64 = rng.sample(StandardNormal);
                    data.push(centre + z);
                }
            }
        }
        data
    }

    #[test]
    fn conditional_row_hits_perplexity() {
        let dist: Vec<f64> = (0..50).map(|j| (j as f64).powi(2) * 0.1).collect();
        let p = conditional_row(&dist, 0, 10f64.ln());
        let h: f64 = -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>();
        assert!((h.exp() - 10.0).abs() < 1e-3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn rejects_infeasible_perplexity() {
        let data = vec![0.0; 20 * 3];
        assert!(tsne_2d(&data, 20, 3, &TsneConfig::default()).is_err());
    }

    #[test]
    fn blobs_stay_apart_and_kl_settles() {
        let m = 100;
        let data = blobs(m / 2, 4);
        let out = tsne_2d(&data, m, 10, &TsneConfig { seed: 2, ..Default::default() }).unwrap();
        let km = super::super::kmeans::kmeans(&out.points.concat(), 2, 2, 10, 1).unwrap();
        let first = km.labels[0];
        assert!(km.labels[..m / 2].iter().all(|&l| l == first));
        assert!(km.labels[m / 2..].iter().all(|&l| l != first));
        let kl: Vec<f64> = out.kl_history.iter().map(|&(_, k)| k).collect();
        assert_eq!(kl.len(), 750);
        for w in kl.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn duplicated_points_stay_together() {
        let mut data = blobs(30, 8);
        let m0 = 60;
        data.extend_from_within(0..10);
        data.extend_from_within(40 * 10..41 * 10);
        let m = m0 + 2;
        let out = tsne_2d(&data, m, 10, &TsneConfig { perplexity: 10.0, seed: 1, ..Default::default() }).unwrap();
        let nearest = |i: usize| {
            (0..m)
                .filter(|&j| j != i)
                .min_by(|&a, &b| {
                    let da = (out.points[i][0] - out.points[a][0]).powi(2) + (out.points[i][1] - out.points[a][1]).powi(2);
                    let db = (out.points[i][0] - out.points[b][0]).powi(2) + (out.points[i][1] - out.points[b][1]).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap()
        };
        assert_eq!(nearest(0), m0);
        assert_eq!(nearest(m0), 0);
        assert_eq!(nearest(40), m0 + 1);
        assert_eq!(nearest(m0 + 1), 40);
    }
}
