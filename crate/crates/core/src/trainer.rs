//! CBOW word2vec with negative sampling.
//!
//! Weights live in `AtomicU32` cells holding `f32` bits. In speed mode several
//! threads update them without locks (lost updates are tolerated, as in the
//! reference word2vec); in deterministic mode a single thread walks the corpus
//! in order, so results are bit-reproducible.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering::Relaxed};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, Vocabulary};
use crate::error::{Error, Result};
use crate::seed;
use crate::text::preprocess;

pub const NOISE_TABLE_SIZE: usize = 10_000_000;
const NOISE_POWER: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negatives: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    pub seed: u64,
    pub threads: usize,
    pub deterministic: bool,
    /// Frequent-word subsampling threshold; off when `None`.
    pub subsample: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 32,
            epochs: 5,
            window: 5,
            negatives: 5,
            min_count: 10,
            learning_rate: 0.025,
            seed: 1,
            threads: 1,
            deterministic: true,
            subsample: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("window", self.window),
            ("negatives", self.negatives),
            ("threads", self.threads),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.dim < 2 {
            return Err(Error::Config("dim must be at least 2".into()));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config("subsample threshold must be positive".into()));
            }
        }
        Ok(())
    }

    fn effective_threads(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.threads
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub vocab_size: usize,
    pub train_tokens: u64,
    /// Mean negative-sampling loss per predicted word, one entry per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Types with count >= `min_count`, ordered by count (desc) then spelling.
pub fn build_vocab(docs: &[Vec<String>], min_count: u64) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for w in d {
            *counts.entry(w.as_str()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    vocab
}

struct Weights(Vec<AtomicU32>);

impl Weights {
    fn new(values: impl Iterator<Item = f32>) -> Self {
        Self(values.map(|v| AtomicU32::new(v.to_bits())).collect())
    }

    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self.0[i].load(Relaxed))
    }

    #[inline]
    fn add(&self, i: usize, v: f32) {
        self.0[i].store((self.get(i) + v).to_bits(), Relaxed);
    }
}

struct Model {
    dim: usize,
    input: Weights,
    output: Weights,
    noise: Vec<u32>,
    keep_prob: Option<Vec<f64>>,
}

fn noise_table(counts: &[u64]) -> Vec<u32> {
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(NOISE_POWER)).collect();
    let total: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(NOISE_TABLE_SIZE);
    let mut word = 0usize;
    let mut cum = weights[0] / total;
    for slot in 0..NOISE_TABLE_SIZE {
        table.push(word as u32);
        if (slot + 1) as f64 / NOISE_TABLE_SIZE as f64 > cum && word + 1 < weights.len() {
            word += 1;
            cum += weights[word] / total;
        }
    }
    table
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x.clamp(-30.0, 30.0)).exp())
}

struct Progress<'a> {
    processed: &'a AtomicU64,
    total: u64,
    lr0: f64,
}

impl Progress<'_> {
    fn lr(&self) -> f32 {
        let done = self.processed.load(Relaxed) as f64 / (self.total as f64 + 1.0);
        (self.lr0 * (1.0 - done).max(1e-4)) as f32
    }
}

impl Model {
    /// One pass over `docs`; returns (summed loss, predicted words).
    fn train_docs(
        &self,
        docs: &[Vec<u32>],
        cfg: &TrainConfig,
        rng: &mut ChaCha8Rng,
        progress: &Progress<'_>,
    ) -> (f64, u64) {
        let d = self.dim;
        let mut h = vec![0f32; d];
        let mut grad = vec![0f32; d];
        let mut kept: Vec<u32> = Vec::new();
        let mut loss = 0f64;
        let mut examples = 0u64;
        let mut pending = 0u64;
        let mut lr = progress.lr();
        for doc in docs {
            kept.clear();
            match &self.keep_prob {
                Some(p) => kept.extend(doc.iter().filter(|&&w| rng.random::<f64>() < p[w as usize])),
                None => kept.extend_from_slice(doc),
            }
            pending += doc.len() as u64;
            if pending >= 10_000 {
                progress.processed.fetch_add(pending, Relaxed);
                pending = 0;
                lr = progress.lr();
            }
            for i in 0..kept.len() {
                let reach = cfg.window - rng.random_range(0..cfg.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach + 1).min(kept.len());
                h.iter_mut().for_each(|x| *x = 0.0);
                let mut n_ctx = 0;
                for j in (lo..hi).filter(|&j| j != i) {
                    let base = kept[j] as usize * d;
                    for (k, x) in h.iter_mut().enumerate() {
                        *x += self.input.get(base + k);
                    }
                    n_ctx += 1;
                }
                if n_ctx == 0 {
                    continue;
                }
                let inv = 1.0 / n_ctx as f32;
                h.iter_mut().for_each(|x| *x *= inv);
                grad.iter_mut().for_each(|x| *x = 0.0);
                let target = kept[i];
                for s in 0..=cfg.negatives {
                    let (word, label) = if s == 0 {
                        (target, 1.0f32)
                    } else {
                        let w = self.noise[rng.random_range(0..self.noise.len())];
                        if w == target {
                            continue;
                        }
                        (w, 0.0)
                    };
                    let base = word as usize * d;
                    let f: f32 = (0..d).map(|k| h[k] * self.output.get(base + k)).sum();
                    let p = sigmoid(f);
                    let prob = if label > 0.5 { p } else { 1.0 - p };
                    loss -= (prob.max(1e-7) as f64).ln();
                    let g = (label - p) * lr;
                    for k in 0..d {
                        let o = self.output.get(base + k);
                        grad[k] += g * o;
                        self.output.add(base + k, g * h[k]);
                    }
                }
                for j in (lo..hi).filter(|&j| j != i) {
                    let base = kept[j] as usize * d;
                    for (k, g) in grad.iter().enumerate() {
                        self.input.add(base + k, *g);
                    }
                }
                examples += 1;
            }
        }
        progress.processed.fetch_add(pending, Relaxed);
        (loss, examples)
    }
}

/// Splits `docs` into `parts` contiguous runs of roughly equal token count.
fn split_by_tokens(docs: &[Vec<u32>], parts: usize) -> Vec<&[Vec<u32>]> {
    let total: usize = docs.iter().map(Vec::len).sum();
    let target = total.div_ceil(parts.max(1)).max(1);
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    let mut acc = 0;
    for (i, d) in docs.iter().enumerate() {
        acc += d.len();
        if acc >= target && out.len() + 1 < parts {
            out.push(&docs[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    out.push(&docs[start..]);
    out
}

/// Trains on preprocessed documents (one token list per document).
pub fn train_documents(docs: &[Vec<String>], cfg: &TrainConfig) -> Result<(Embedding, TrainReport)> {
    cfg.validate()?;
    let vocab = build_vocab(docs, cfg.min_count);
    if vocab.is_empty() {
        return Err(Error::invalid(format!(
            "no word occurs at least {} times",
            cfg.min_count
        )));
    }
    let index: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (w.as_str(), i as u32))
        .collect();
    let ids: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|w| index.get(w.as_str()).copied()).collect())
        .collect();
    let counts: Vec<u64> = vocab.iter().map(|(_, c)| *c).collect();
    let train_tokens: u64 = counts.iter().sum();
    let v = vocab.len();
    let d = cfg.dim;

    let mut init_rng = seed::rng(seed::derive(cfg.seed, "trainer/init"));
    let input = Weights::new((0..v * d).map(|_| (init_rng.random::<f32>() - 0.5) / d as f32));
    let output = Weights::new(std::iter::repeat_n(0.0, v * d));
    let keep_prob = cfg.subsample.map(|t| {
        counts
            .iter()
            .map(|&c| {
                let f = c as f64 / train_tokens as f64;
                ((t / f).sqrt() + t / f).min(1.0)
            })
            .collect()
    });
    let model = Model {
        dim: d,
        input,
        output,
        noise: noise_table(&counts),
        keep_prob,
    };

    let threads = cfg.effective_threads();
    let chunks = split_by_tokens(&ids, threads);
    let processed = AtomicU64::new(0);
    let progress = Progress {
        processed: &processed,
        total: train_tokens * cfg.epochs as u64,
        lr0: cfg.learning_rate,
    };
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let label = |t: usize| format!("trainer/epoch{epoch}/thread{t}");
        let results: Vec<(f64, u64)> = if chunks.len() == 1 {
            let mut rng = seed::rng(seed::derive(cfg.seed, &label(0)));
            vec![model.train_docs(chunks[0], cfg, &mut rng, &progress)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = chunks
                    .iter()
                    .enumerate()
                    .map(|(t, chunk)| {
                        let model = &model;
                        let progress = &progress;
                        let mut rng = seed::rng(seed::derive(cfg.seed, &label(t)));
                        s.spawn(move || model.train_docs(chunk, cfg, &mut rng, progress))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("trainer thread panicked"))
                    .collect()
            })
        };
        let (loss, n) = results
            .iter()
            .fold((0.0, 0u64), |(l, c), (a, b)| (l + a, c + b));
        let mean = if n == 0 { 0.0 } else { loss / n as f64 };
        log::debug!("epoch {} loss {:.4}", epoch + 1, mean);
        epoch_loss.push(mean);
    }

    let data: Vec<f64> = (0..v * d).map(|i| model.input.get(i) as f64).collect();
    let words = vocab.into_iter().map(|(w, _)| w).collect();
    let embedding = Embedding::new(Vocabulary::new(words)?, d, data)?;
    Ok((
        embedding,
        TrainReport {
            vocab_size: v,
            train_tokens,
            epoch_loss,
        },
    ))
}

/// Trains on training text: one document per line, preprocessed on the fly.
pub fn train(text: &str, cfg: &TrainConfig) -> Result<(Embedding, TrainReport)> {
    let docs: Vec<Vec<String>> = text.lines().map(preprocess).collect();
    train_documents(&docs, cfg)
}
