//! RBF-kernel support vector machine trained by SMO with maximal-violating-pair
//! working-set selection.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cluster::unit_rows;
use super::direction::{LabeledWord, Side};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// Defaults to `1 / (features * variance of all feature values)`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// Iteration cap, counted in sweeps of `n` pair updates.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfSvm {
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
    pub iterations: usize,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

pub fn scale_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x.first().map_or(1, Vec::len);
    let n = (x.len() * d) as f64;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}

impl RbfSvm {
    /// `y` holds +1 / -1 labels.
    pub fn train(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n == 0 {
            return Err(Error::invalid("feature and label counts differ or are zero"));
        }
        if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("both classes must be present"));
        }
        let gamma = cfg.gamma.unwrap_or_else(|| scale_gamma(x));
        let k: Vec<Vec<f64>> = par::map_range(n, |i| (0..n).map(|j| rbf(&x[i], &x[j], gamma)).collect());
        let c = cfg.c;
        let mut alpha = vec![0.0f64; n];
        let mut grad = vec![-1.0f64; n];
        let up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
        let low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);
        let max_iter = cfg.max_passes.saturating_mul(n).max(1);
        let mut iterations = 0;
        while iterations < max_iter {
            let mut i = usize::MAX;
            let mut gmax = f64::NEG_INFINITY;
            let mut j = usize::MAX;
            let mut gmin = f64::INFINITY;
            for t in 0..n {
                let v = -y[t] * grad[t];
                if up(t, &alpha) && v > gmax {
                    gmax = v;
                    i = t;
                }
                if low(t, &alpha) && v < gmin {
                    gmin = v;
                    j = t;
                }
            }
            if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.tolerance {
                break;
            }
            iterations += 1;
            let (ai, aj) = (alpha[i], alpha[j]);
            let qij = y[i] * y[j] * k[i][j];
            if y[i] != y[j] {
                let quad = (k[i][i] + k[j][j] + 2.0 * qij).max(1e-12);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (k[i][i] + k[j][j] - 2.0 * qij).max(1e-12);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * k[t][i] * di + y[j] * k[t][j] * dj);
            }
        }
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut free_sum) = (0usize, 0.0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] >= c {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
        let (support, coef) = (0..n)
            .filter(|&t| alpha[t] > 0.0)
            .map(|t| (x[t].clone(), alpha[t] * y[t]))
            .unzip();
        Ok(Self {
            support,
            coef,
            rho,
            gamma,
            iterations,
        })
    }

    pub fn decision(&self, v: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(s, v, self.gamma))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict(&self, v: &[f64]) -> f64 {
        if self.decision(v) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn support_count(&self) -> usize {
        self.support.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReclassifyReport {
    pub accuracy: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Trains on a balanced sample of `train_n` words and reports accuracy on the rest.
pub fn svm_reclassify(
    e: &Embedding,
    biased: &[LabeledWord],
    train_n: usize,
    seed: u64,
    cfg: &SvmConfig,
) -> Result<ReclassifyReport> {
    let usable: Vec<&LabeledWord> = biased.iter().filter(|w| e.resolve(&w.word).is_some()).collect();
    let skipped = biased.len() - usable.len();
    let half = train_n / 2;
    if half == 0 {
        return Err(Error::Config("training sample must hold both classes".into()));
    }
    let mut pos: Vec<usize> = (0..usable.len()).filter(|&i| usable[i].side == Side::Positive).collect();
    let mut neg: Vec<usize> = (0..usable.len()).filter(|&i| usable[i].side == Side::Negative).collect();
    if pos.len() < half || neg.len() < half {
        return Err(Error::invalid(format!(
            "cannot draw {half} words per side ({} positive, {} negative available)",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = seed::rng(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut train: Vec<usize> = pos[..half].iter().chain(&neg[..half]).copied().collect();
    train.sort_unstable();
    let test: Vec<usize> = pos[half..].iter().chain(&neg[half..]).copied().collect();
    if test.is_empty() {
        return Err(Error::invalid("no words left for testing"));
    }
    let rows = unit_rows(e, &usable);
    let label = |i: usize| if usable[i].side == Side::Positive { 1.0 } else { -1.0 };
    let x: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
    let y: Vec<f64> = train.iter().map(|&i| label(i)).collect();
    let svm = RbfSvm::train(&x, &y, cfg)?;
    let correct = par::map(&test, |&i| svm.predict(&rows[i]) == label(i))
        .into_iter()
        .filter(|&c| c)
        .count();
    Ok(ReclassifyReport {
        accuracy: correct as f64 / test.len() as f64,
        train_size: train.len(),
        test_size: test.len(),
        skipped,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn xor_needs_a_kernel() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![1.0, 1.0, -1.0, -1.0];
        let cfg = SvmConfig { c: 10.0, gamma: Some(2.0), ..Default::default() };
        let svm = RbfSvm::train(&x, &y, &cfg).unwrap();
        for (v, l) in x.iter().zip(&y) {
            assert_eq!(svm.predict(v), *l);
        }
    }

    fn labelled(n: usize, shift: f64, shuffle_labels: bool, seed: u64) -> (Embedding, Vec<LabeledWord>) {
        let mut rng = crate::seed::rng(seed);
        let mut rows = Vec::new();
        let mut words = Vec::new();
        for i in 0..n {
            let side = if i % 2 == 0 { Side::Positive } else { Side::Negative };
            let mut v: Vec<f64> = (0..10).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            v[0] += if side == Side::Positive { shift } else { -shift };
            let w = format!("w{i}");
            rows.push((w.clone(), v));
            let side = if shuffle_labels {
                if rng.random::<bool>() { Side::Positive } else { Side::Negative }
            } else {
                side
            };
            words.push(LabeledWord { word: w, side });
        }
        (Embedding::from_rows(rows).unwrap(), words)
    }

    #[test]
    fn separable_data_is_reclassified() {
        let (e, words) = labelled(600, 4.0, false, 1);
        let r = svm_reclassify(&e, &words, 200, 3, &SvmConfig::default()).unwrap();
        assert!(r.accuracy > 0.95, "{}", r.accuracy);
        assert_eq!(r.train_size, 200);
        assert_eq!(r.test_size, 400);
    }

    #[test]
    fn shuffled_labels_are_chance() {
        let (e, words) = labelled(5000, 0.0, true, 2);
        let r = svm_reclassify(&e, &words, 1000, 4, &SvmConfig::default()).unwrap();
        assert!((0.45..=0.55).contains(&r.accuracy), "{}", r.accuracy);
    }

    #[test]
    fn imbalance_is_an_error() {
        let (e, mut words) = labelled(40, 1.0, false, 3);
        words.iter_mut().for_each(|w| w.side = Side::Positive);
        assert!(svm_reclassify(&e, &words, 20, 1, &SvmConfig::default()).is_err());
    }
}
