use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::direction::LabeledWord;
use super::kmeans::kmeans;
use super::tsne::{tsne_2d, TsneConfig};
use super::vmeasure::{v_measure, VMeasure};
use crate::embedding::{norm, Embedding};
use crate::error::{Error, Result};
use crate::{par, seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub sample_size: usize,
    pub samples: usize,
    pub perplexity: f64,
    pub tsne_iterations: usize,
    pub kmeans_restarts: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            sample_size: 200,
            samples: 1000,
            perplexity: 30.0,
            tsne_iterations: 1000,
            kmeans_restarts: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
    pub v_std: f64,
    pub sample_size: usize,
    pub samples: usize,
    pub seed: u64,
    /// Selected words missing from the evaluated embedding.
    pub skipped: usize,
    /// Per-sample V-measures, in sample order.
    pub v_samples: Vec<f64>,
}

/// Unit-normalised rows for the given words (zero vectors left as is).
pub(crate) fn unit_rows(e: &Embedding, words: &[&LabeledWord]) -> Vec<Vec<f64>> {
    words
        .iter()
        .map(|w| {
            let v = e.row(e.resolve(&w.word).expect("caller keeps only resolvable words"));
            let n = norm(v);
            if n > 0.0 {
                v.iter().map(|x| x / n).collect()
            } else {
                v.to_vec()
            }
        })
        .collect()
}

/// Repeated sample -> t-SNE -> 2-means -> V-measure against the side labels.
pub fn cluster_purity_eval(e: &Embedding, biased: &[LabeledWord], cfg: &ClusterConfig) -> Result<ClusterReport> {
    let usable: Vec<&LabeledWord> = biased.iter().filter(|w| e.resolve(&w.word).is_some()).collect();
    let skipped = biased.len() - usable.len();
    if usable.len() < cfg.sample_size {
        return Err(Error::invalid(format!(
            "only {} of the biased words resolve; {} needed",
            usable.len(),
            cfg.sample_size
        )));
    }
    if cfg.samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let rows = unit_rows(e, &usable);
    let d = e.dim();
    let results = par::map_range(cfg.samples, |s| -> Result<VMeasure> {
        let sample_seed = seed::derive_index(cfg.seed, s as u64);
        let mut rng = seed::rng(sample_seed);
        let idx = sample(&mut rng, usable.len(), cfg.sample_size);
        let data: Vec<f64> = idx.iter().flat_map(|i| rows[i].iter().copied()).collect();
        let gold: Vec<usize> = idx.iter().map(|i| usable[i].side.label()).collect();
        let tsne = TsneConfig {
            perplexity: cfg.perplexity,
            iterations: cfg.tsne_iterations,
            seed: seed::derive(sample_seed, "tsne"),
            ..Default::default()
        };
        let out = tsne_2d(&data, cfg.sample_size, d, &tsne)?;
        let flat: Vec<f64> = out.points.concat();
        let km = kmeans(&flat, 2, 2, cfg.kmeans_restarts, seed::derive(sample_seed, "kmeans"))?;
        v_measure(&km.labels, &gold)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let n = results.len() as f64;
    let mean = |f: fn(&VMeasure) -> f64| results.iter().map(f).sum::<f64>() / n;
    let v_mean = mean(|r| r.v_measure);
    let v_std = if results.len() > 1 {
        (results.iter().map(|r| (r.v_measure - v_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(ClusterReport {
        homogeneity: mean(|r| r.homogeneity),
        completeness: mean(|r| r.completeness),
        v_measure: v_mean,
        v_std,
        sample_size: cfg.sample_size,
        samples: cfg.samples,
        seed: cfg.seed,
        skipped,
        v_samples: results.iter().map(|r| r.v_measure).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::direction::Side;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn embedding(separated: bool, seed: u64) -> (Embedding, Vec<LabeledWord>) {
        let mut rng = seed::rng(seed);
        let mut rows = Vec::new();
        let mut words = Vec::new();
        for i in 0..120 {
            let side = if i % 2 == 0 { Side::Positive } else { Side::Negative };
            let mut v: Vec<f64> = (0..8).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if separated {
                v[0] += if side == Side::Positive { 8.0 } else { -8.0 };
            }
            let w = format!("w{i}");
            rows.push((w.clone(), v));
            words.push(LabeledWord { word: w, side });
        }
        (Embedding::from_rows(rows).unwrap(), words)
    }

    fn cfg() -> ClusterConfig {
        ClusterConfig {
            sample_size: 60,
            samples: 6,
            perplexity: 15.0,
            tsne_iterations: 500,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn separated_sides_cluster_perfectly() {
        let (e, words) = embedding(true, 1);
        let r = cluster_purity_eval(&e, &words, &cfg()).unwrap();
        assert!(r.v_measure > 0.95, "{}", r.v_measure);
    }

    #[test]
    fn isotropic_sides_do_not_cluster() {
        let (e, words) = embedding(false, 2);
        let r = cluster_purity_eval(&e, &words, &cfg()).unwrap();
        assert!(r.v_measure < 0.15, "{}", r.v_measure);
    }

    #[test]
    fn deterministic_and_reports_skips() {
        let (e, mut words) = embedding(true, 3);
        words.push(LabeledWord { word: "absent".into(), side: Side::Positive });
        let a = cluster_purity_eval(&e, &words, &cfg()).unwrap();
        let b = cluster_purity_eval(&e, &words, &cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.skipped, 1);
        let big = ClusterConfig { sample_size: 500, ..cfg() };
        assert!(cluster_purity_eval(&e, &words, &big).is_err());
    }
}
