use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};

use super::permutation::{one_sided_p, PermutationCount, EXACT_LIMIT};
use crate::embedding::{cosine, Embedding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatTest {
    pub name: String,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

impl WeatTest {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: WeatTest = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::invalid(format!(
                "{}: target sets differ in size ({} vs {})",
                self.name,
                self.x.len(),
                self.y.len()
            )));
        }
        let lists = [&self.x, &self.y, &self.a, &self.b];
        if lists.iter().any(|l| l.is_empty()) {
            return Err(Error::invalid(format!("{}: empty word list", self.name)));
        }
        let mut seen = HashSet::new();
        for w in lists.into_iter().flatten() {
            if !seen.insert(w.to_lowercase()) {
                return Err(Error::Duplicate(format!("{}: '{w}'", self.name)));
            }
        }
        Ok(())
    }

    pub fn swapped_targets(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
            ..self.clone()
        }
    }

    pub fn swapped_attributes(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatResult {
    pub test: String,
    pub effect_size: f64,
    pub p_one_sided: f64,
    pub permutations_used: PermutationCount,
    /// Words missing from the embedding, dropped before scoring.
    pub dropped: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `s(w, A, B)`: mean cosine with `A` minus mean cosine with `B`.
pub fn association(w: &[f64], a: &[&[f64]], b: &[&[f64]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("attribute lists must be non-empty"));
    }
    let ma = a.iter().map(|v| cosine(w, v)).collect::<Result<Vec<_>>>()?;
    let mb = b.iter().map(|v| cosine(w, v)).collect::<Result<Vec<_>>>()?;
    Ok(mean(&ma) - mean(&mb))
}

/// Word-level form of [`association`].
pub fn weat_association(w: &str, a: &[String], b: &[String], e: &Embedding) -> Result<f64> {
    let vecs = |ws: &[String]| ws.iter().map(|x| e.try_vector(x)).collect::<Result<Vec<_>>>();
    association(e.try_vector(w)?, &vecs(a)?, &vecs(b)?)
}

fn resolve<'e>(e: &'e Embedding, words: &[String], dropped: &mut Vec<String>) -> Vec<&'e [f64]> {
    words
        .iter()
        .filter_map(|w| {
            let v = e.resolve(w).map(|i| e.row(i));
            if v.is_none() {
                dropped.push(w.clone());
            }
            v
        })
        .collect()
}

pub fn weat_run(t: &WeatTest, e: &Embedding, permutations: usize, seed: u64) -> Result<WeatResult> {
    weat_run_with_limit(t, e, permutations, seed, EXACT_LIMIT)
}

/// Runs a WEAT. Splits are enumerated when there are at most `exact_limit`.
pub fn weat_run_with_limit(
    t: &WeatTest,
    e: &Embedding,
    permutations: usize,
    seed: u64,
    exact_limit: u64,
) -> Result<WeatResult> {
    t.validate()?;
    let mut dropped = Vec::new();
    let x = resolve(e, &t.x, &mut dropped);
    let y = resolve(e, &t.y, &mut dropped);
    let a = resolve(e, &t.a, &mut dropped);
    let b = resolve(e, &t.b, &mut dropped);
    if !dropped.is_empty() {
        warn!("{}: dropped {} out-of-vocabulary words", t.name, dropped.len());
    }
    if x.is_empty() || y.is_empty() || a.is_empty() || b.is_empty() {
        return Err(Error::invalid(format!(
            "{}: a word set has no in-vocabulary words",
            t.name
        )));
    }
    let sx = x.iter().map(|w| association(w, &a, &b)).collect::<Result<Vec<_>>>()?;
    let sy = y.iter().map(|w| association(w, &a, &b)).collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    let m = mean(&all);
    let var = all.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (all.len() as f64 - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::numeric(format!(
            "{}: association scores have zero variance",
            t.name
        )));
    }
    let effect_size = (mean(&sx) - mean(&sy)) / sd;
    let observed: f64 = sx.iter().sum();
    let (p, used) = one_sided_p(&all, sx.len(), observed, permutations, seed, exact_limit)?;
    Ok(WeatResult {
        test: t.name.clone(),
        effect_size,
        p_one_sided: p,
        permutations_used: used,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn words(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn test4() -> WeatTest {
        WeatTest {
            name: "t".into(),
            x: words("x", 4),
            y: words("y", 4),
            a: words("a", 3),
            b: words("b", 3),
        }
    }

    fn random_embedding(t: &WeatTest, seed: u64, d: usize) -> Embedding {
        let mut rng = crate::seed::rng(seed);
        let rows = [&t.x, &t.y, &t.a, &t.b]
            .into_iter()
            .flatten()
            .map(|w| (w.clone(), (0..d).map(|_| rng.random::<f64>() - 0.5).collect()))
            .collect();
        Embedding::from_rows(rows).unwrap()
    }

    #[test]
    fn association_edge_cases() {
        let w = [1.0, 0.0];
        let a: [&[f64]; 1] = [&[1.0, 0.0]];
        let b: [&[f64]; 1] = [&[0.0, 1.0]];
        assert!((association(&w, &a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(association(&w, &a, &a).unwrap(), 0.0);
        assert!(association(&w, &[], &b).is_err());
    }

    #[test]
    fn association_matches_direct_mean_difference() {
        let t = test4();
        let e = random_embedding(&t, 11, 5);
        for w in &t.x {
            let got = weat_association(w, &t.a, &t.b, &e).unwrap();
            let cos = |u: &str, v: &str| {
                let (p, q) = (e.vector(u).unwrap(), e.vector(v).unwrap());
                let d: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                let n = |z: &[f64]| z.iter().map(|c| c * c).sum::<f64>().sqrt();
                d / (n(p) * n(q))
            };
            let ma = t.a.iter().map(|a| cos(w, a)).sum::<f64>() / 3.0;
            let mb = t.b.iter().map(|b| cos(w, b)).sum::<f64>() / 3.0;
            assert!((got - (ma - mb)).abs() < 1e-12);
        }
    }

    #[test]
    fn planted_instance_hits_minimum_p() {
        let t = test4();
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        for (i, w) in t.x.iter().enumerate() {
            rows.push((w.clone(), vec![1.0, 0.0, 0.1 * i as f64]));
        }
        for (i, w) in t.y.iter().enumerate() {
            rows.push((w.clone(), vec![0.0, 1.0, 0.1 * i as f64]));
        }
        for w in &t.a {
            rows.push((w.clone(), vec![1.0, 0.0, 0.0]));
        }
        for w in &t.b {
            rows.push((w.clone(), vec![0.0, 1.0, 0.0]));
        }
        let e = Embedding::from_rows(rows).unwrap();
        let r = weat_run(&t, &e, 10_000, 1).unwrap();
        assert!(r.effect_size > 1.5, "{}", r.effect_size);
        assert_eq!(r.p_one_sided, 0.0);
        assert_eq!(r.permutations_used, PermutationCount::Exact(70));
    }

    #[test]
    fn monte_carlo_close_to_exact() {
        let t = test4();
        for s in 0..10 {
            let e = random_embedding(&t, 100 + s, 6);
            let exact = weat_run(&t, &e, 10_000, s).unwrap();
            let mc = weat_run_with_limit(&t, &e, 10_000, s, 0).unwrap();
            assert_eq!(mc.permutations_used, PermutationCount::MonteCarlo(10_000));
            assert!((exact.p_one_sided - mc.p_one_sided).abs() <= 0.02);
            assert_eq!(exact.effect_size, mc.effect_size);
        }
    }

    #[test]
    fn drops_oov_and_validates() {
        let mut t = test4();
        let e = random_embedding(&t, 1, 4);
        t.x[0] = "missing".into();
        let r = weat_run(&t, &e, 100, 1).unwrap();
        assert_eq!(r.dropped, vec!["missing".to_string()]);
        t.y[0] = "x1".into();
        assert!(t.validate().is_err());
        let mut u = test4();
        u.y.pop();
        assert!(weat_run(&u, &e, 100, 1).is_err());
    }

    #[test]
    fn shipped_tests_parse() {
        for t in crate::data::weat_tests() {
            t.validate().unwrap();
            assert_eq!(t.x.len(), 8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn effect_size_is_antisymmetric_and_scale_free(seed in 0u64..10_000, scale in 0.01f64..100.0) {
            let t = test4();
            let e = random_embedding(&t, seed, 5);
            let d = weat_run(&t, &e, 10, 0).unwrap().effect_size;
            let dx = weat_run(&t.swapped_targets(), &e, 10, 0).unwrap().effect_size;
            let da = weat_run(&t.swapped_attributes(), &e, 10, 0).unwrap().effect_size;
            prop_assert!((d + dx).abs() < 1e-12);
            prop_assert!((d + da).abs() < 1e-12);
            let scaled = Embedding::from_rows(
                e.vocab().words().iter().map(|w| (w.clone(), e.vector(w).unwrap().iter().map(|x| x * scale).collect())).collect(),
            ).unwrap();
            let ds = weat_run(&t, &scaled, 10, 0).unwrap().effect_size;
            prop_assert!((d - ds).abs() < 1e-9);
        }
    }
}
