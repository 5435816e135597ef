//! Permutation tests over two-sample splits.
//!
//! Exact enumeration is used whenever the number of splits is at most
//! [`EXACT_LIMIT`]; otherwise splits are sampled in fixed-size blocks, each
//! with its own derived seed, so the estimate does not depend on scheduling.

use itertools::Itertools;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{par, seed};

pub const EXACT_LIMIT: u64 = 20_000;
const BLOCK: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationCount {
    Exact(u64),
    MonteCarlo(u64),
}

/// `C(n, k)`, or `None` once it exceeds `limit`.
pub fn binomial_up_to(n: usize, k: usize, limit: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > limit as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn tolerance(values: &[f64]) -> f64 {
    1e-12 * values.iter().fold(1.0f64, |m, v| m.max(v.abs())) * values.len() as f64
}

/// Counts splits (first group of size `k`) whose statistic satisfies `hit`.
/// The statistic passed to `hit` is the sum over the first group.
fn count_splits(
    values: &[f64],
    k: usize,
    permutations: usize,
    seed: u64,
    exact_limit: u64,
    hit: impl Fn(f64) -> bool + Sync + Send,
) -> (u64, PermutationCount) {
    let n = values.len();
    if let Some(total) = binomial_up_to(n, k, exact_limit) {
        let count = (0..n)
            .combinations(k)
            .filter(|c| hit(c.iter().map(|&i| values[i]).sum()))
            .count() as u64;
        return (count, PermutationCount::Exact(total));
    }
    let blocks = permutations.div_ceil(BLOCK);
    let counts = par::map_range(blocks, |b| {
        let mut rng = seed::rng(seed::derive_index(seed, b as u64));
        let len = BLOCK.min(permutations - b * BLOCK);
        (0..len)
            .filter(|_| hit(sample(&mut rng, n, k).iter().map(|i| values[i]).sum()))
            .count() as u64
    });
    (counts.iter().sum(), PermutationCount::MonteCarlo(permutations as u64))
}

fn denominator(c: PermutationCount) -> f64 {
    match c {
        PermutationCount::Exact(n) | PermutationCount::MonteCarlo(n) => n as f64,
    }
}

/// One-sided p: share of size-`k` splits of `values` whose first-group sum
/// strictly exceeds `observed` (beyond floating-point noise). Splits are
/// enumerated when there are at most `exact_limit` of them.
pub fn one_sided_p(
    values: &[f64],
    k: usize,
    observed: f64,
    permutations: usize,
    seed: u64,
    exact_limit: u64,
) -> Result<(f64, PermutationCount)> {
    if k == 0 || k >= values.len() {
        return Err(Error::invalid("both groups must be non-empty"));
    }
    if permutations == 0 {
        return Err(Error::Config("permutation count must be positive".into()));
    }
    let tol = tolerance(values);
    let (count, used) = count_splits(values, k, permutations, seed, exact_limit, |s| {
        s > observed + tol
    });
    Ok((count as f64 / denominator(used), used))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub mean_difference: f64,
    pub p_two_sided: f64,
    pub alpha: f64,
    pub significant: bool,
    pub permutations: PermutationCount,
}

/// Two-sided test on the difference of sample means: p is the share of
/// relabelings whose absolute mean difference is at least the observed one.
pub fn permutation_compare(
    first: &[f64],
    second: &[f64],
    permutations: usize,
    alpha: f64,
    seed: u64,
) -> Result<Comparison> {
    permutation_compare_with_limit(first, second, permutations, alpha, seed, EXACT_LIMIT)
}

pub fn permutation_compare_with_limit(
    first: &[f64],
    second: &[f64],
    permutations: usize,
    alpha: f64,
    seed: u64,
    exact_limit: u64,
) -> Result<Comparison> {
    if first.is_empty() || second.is_empty() {
        return Err(Error::invalid("samples must be non-empty"));
    }
    if permutations == 0 {
        return Err(Error::Config("permutation count must be positive".into()));
    }
    let (n1, n2) = (first.len() as f64, second.len() as f64);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let observed = mean(first) - mean(second);
    let pooled: Vec<f64> = first.iter().chain(second).copied().collect();
    let total: f64 = pooled.iter().sum();
    let constant = pooled.iter().all(|&v| v == pooled[0]);
    let (p, used) = if constant {
        let n = binomial_up_to(pooled.len(), first.len(), exact_limit)
            .map_or(PermutationCount::MonteCarlo(permutations as u64), PermutationCount::Exact);
        (1.0, n)
    } else {
        let tol = tolerance(&pooled);
        let threshold = observed.abs();
        let (count, used) = count_splits(&pooled, first.len(), permutations, seed, exact_limit, |s1| {
            let diff = s1 / n1 - (total - s1) / n2;
            diff.abs() >= threshold - tol
        });
        (count as f64 / denominator(used), used)
    };
    Ok(Comparison {
        mean_difference: observed,
        p_two_sided: p,
        alpha,
        significant: p < alpha,
        permutations: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial_up_to(8, 4, 1000), Some(70));
        assert_eq!(binomial_up_to(6, 3, 1000), Some(20));
        assert_eq!(binomial_up_to(40, 20, 20_000), None);
        assert_eq!(binomial_up_to(5, 0, 10), Some(1));
    }

    #[test]
    fn extreme_samples_give_exact_tenth() {
        let c = permutation_compare(&[0.0; 3], &[1.0; 3], 10_000, 0.01, 1).unwrap();
        assert_eq!(c.p_two_sided, 0.1);
        assert_eq!(c.permutations, PermutationCount::Exact(20));
    }

    #[test]
    fn identical_samples_give_one() {
        let s = [0.3, 0.1, 0.7, 0.2];
        let c = permutation_compare(&s, &s, 10_000, 0.01, 1).unwrap();
        assert_eq!(c.p_two_sided, 1.0);
        let c = permutation_compare(&[2.0; 4], &[2.0; 5], 10_000, 0.01, 1).unwrap();
        assert_eq!(c.p_two_sided, 1.0);
        assert!(permutation_compare(&[], &s, 10, 0.01, 1).is_err());
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        use rand::Rng;
        let mut rng = seed::rng(5);
        for trial in 0..20 {
            let a: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.random::<f64>() + 0.3).collect();
            let exact = permutation_compare(&a, &b, 10_000, 0.01, trial).unwrap();
            assert_eq!(exact.permutations, PermutationCount::Exact(924));
            let mc = permutation_compare_with_limit(&a, &b, 10_000, 0.01, trial, 0).unwrap();
            assert_eq!(mc.permutations, PermutationCount::MonteCarlo(10_000));
            assert!((mc.p_two_sided - exact.p_two_sided).abs() < 0.02);

            let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
            let obs: f64 = a.iter().sum();
            let (pe, _) = one_sided_p(&pooled, 6, obs, 10_000, trial, EXACT_LIMIT).unwrap();
            let (pm, _) = one_sided_p(&pooled, 6, obs, 10_000, trial, 0).unwrap();
            assert!((pe - pm).abs() < 0.02, "{pe} vs {pm}");
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let v: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let a = one_sided_p(&v, 15, 0.5, 5000, 9, 0).unwrap();
        let b = one_sided_p(&v, 15, 0.5, 5000, 9, 0).unwrap();
        assert_eq!(a, b);
    }
}
