//! Gender-subspace identification and hard debiasing (neutralise + equalise).
//!
//! The subspace is spanned by the top eigenvectors of the averaged
//! within-pair covariance of the definitional pairs. Neutralising removes the
//! in-subspace part of gender-neutral words and renormalises; equalising
//! rewrites each equalise pair as
//! `w = nu + sqrt(1 - |nu|^2) * (w_B - mu_B) / |w_B - mu_B|`
//! where `mu` is the pair mean and `nu = mu - mu_B`. Both results are unit
//! vectors, and every neutralised word `e` then satisfies
//! `|e - w|^2 = 2 - 2 e.nu`, so the two pair members are equidistant from it.

use std::collections::HashSet;

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::embedding::{dot, norm, Embedding};
use crate::error::{Error, Result};
use crate::linalg::{fix_sign, symmetric_eigen};
use crate::names::NamePairing;
use crate::{par, seed};

pub type WordPair = (String, String);

/// How many principal components make up the subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentSelector {
    Fixed(usize),
    /// Smallest `k` whose cumulative eigenvalue share is strictly greater than the fraction.
    VarianceFraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderSubspace {
    /// Orthonormal basis vectors, one per component.
    pub basis: Vec<Vec<f64>>,
    /// Eigenvalues of the retained components, descending.
    pub eigenvalues: Vec<f64>,
    /// Share of the full spectrum captured by the retained components.
    pub variance_fraction: f64,
    /// Every eigenvalue's share of the spectrum, descending.
    pub spectrum_shares: Vec<f64>,
}

impl GenderSubspace {
    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    /// Projection of `v` onto the subspace.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for b in &self.basis {
            let c = dot(v, b);
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub parallel: Vec<f64>,
    pub orthogonal: Vec<f64>,
}

impl Decomposition {
    /// Bias magnitude `|v_B|`.
    pub fn bias_magnitude(&self) -> f64 {
        norm(&self.parallel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizeState {
    pub mu: Vec<f64>,
    pub mu_b: Vec<f64>,
    pub nu: Vec<f64>,
}

/// Word lists consumed by WED.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedWordSets {
    pub definitional: Vec<WordPair>,
    pub equalise: Vec<WordPair>,
    pub gender_specific_seed: Vec<String>,
    /// Negative examples for the expansion classifier. When absent, the most
    /// frequent vocabulary words outside the gendered lists are used.
    pub neutral_seed: Option<Vec<String>>,
    /// Expand the gender-specific seed with a linear classifier.
    pub expand: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WedVariant {
    #[serde(rename = "WED40")]
    Wed40,
    #[serde(rename = "WED70")]
    Wed70,
    #[serde(rename = "nWED70")]
    NWed70,
}

impl WedVariant {
    pub fn selector(self) -> ComponentSelector {
        match self {
            WedVariant::Wed40 => ComponentSelector::VarianceFraction(0.40),
            WedVariant::Wed70 | WedVariant::NWed70 => ComponentSelector::VarianceFraction(0.70),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WedVariant::Wed40 => "WED40",
            WedVariant::Wed70 => "WED70",
            WedVariant::NWed70 => "nWED70",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedReport {
    pub variant: WedVariant,
    pub k: usize,
    pub variance_fraction: f64,
    pub spectrum_shares: Vec<f64>,
    pub definitional_pairs_used: usize,
    pub gender_specific: usize,
    pub neutralized: usize,
    pub equalise_pairs: usize,
    pub equalized: usize,
    pub equalise_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub definitional: Vec<f64>,
    pub random_baseline: Vec<f64>,
}

fn resolve_pair(e: &Embedding, pair: &WordPair) -> Option<(usize, usize)> {
    Some((e.resolve(&pair.0)?, e.resolve(&pair.1)?))
}

fn covariance(e: &Embedding, pairs: &[(usize, usize)]) -> Vec<f64> {
    let d = e.dim();
    let mut c = vec![0.0; d * d];
    for &(a, b) in pairs {
        let set = [e.row(a), e.row(b)];
        let mu: Vec<f64> = (0..d).map(|j| (set[0][j] + set[1][j]) / 2.0).collect();
        for w in set {
            let diff: Vec<f64> = w.iter().zip(&mu).map(|(x, m)| x - m).collect();
            for r in 0..d {
                for s in 0..d {
                    c[r * d + s] += diff[r] * diff[s] / set.len() as f64;
                }
            }
        }
    }
    c
}

fn spectrum(c: &[f64], d: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let eig = symmetric_eigen(c, d)?;
    let values: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if total <= 0.0 || scale == 0.0 {
        return Err(Error::numeric(
            "degenerate covariance: all pair differences are zero",
        ));
    }
    Ok((values, eig.vectors, total))
}

pub fn select_k(shares: &[f64], selector: ComponentSelector) -> Result<usize> {
    match selector {
        ComponentSelector::Fixed(k) if k >= 1 && k <= shares.len() => Ok(k),
        ComponentSelector::Fixed(k) => Err(Error::Config(format!(
            "component count {k} outside 1..={}",
            shares.len()
        ))),
        ComponentSelector::VarianceFraction(f) => {
            let mut cum = 0.0;
            for (i, s) in shares.iter().enumerate() {
                cum += s;
                if cum > f {
                    return Ok(i + 1);
                }
            }
            Err(Error::Config(format!(
                "no component count explains more than {f} of the variance"
            )))
        }
    }
}

/// Computes the bias subspace from definitional pairs.
pub fn compute_bias_subspace(
    e: &Embedding,
    pairs: &[WordPair],
    selector: ComponentSelector,
) -> Result<GenderSubspace> {
    if pairs.is_empty() {
        return Err(Error::invalid("at least one definitional pair is required"));
    }
    let idx = pairs
        .iter()
        .map(|p| {
            resolve_pair(e, p).ok_or_else(|| {
                let missing = if e.resolve(&p.0).is_none() { &p.0 } else { &p.1 };
                Error::UnknownWord(missing.clone())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = e.dim();
    let (values, vectors, total) = spectrum(&covariance(e, &idx), d)?;
    let shares: Vec<f64> = values.iter().map(|v| v / total).collect();
    let k = select_k(&shares, selector)?;
    let basis = vectors
        .into_iter()
        .take(k)
        .map(|mut v| {
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(GenderSubspace {
        basis,
        eigenvalues: values[..k].to_vec(),
        variance_fraction: shares[..k].iter().sum(),
        spectrum_shares: shares,
    })
}

pub fn decompose(v: &[f64], b: &GenderSubspace) -> Result<Decomposition> {
    if v.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            actual: v.len(),
        });
    }
    let parallel = b.project(v);
    let orthogonal = v.iter().zip(&parallel).map(|(x, p)| x - p).collect();
    Ok(Decomposition {
        parallel,
        orthogonal,
    })
}

/// Replaces each listed word's vector by its unit-normalised component
/// orthogonal to the subspace. Returns the number of words treated.
pub fn neutralize(e: &mut Embedding, b: &GenderSubspace, words: &[String]) -> Result<usize> {
    if b.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            actual: b.dim(),
        });
    }
    if b.k() >= e.dim() {
        return Err(Error::invalid(
            "subspace spans the whole space; nothing can be neutralised",
        ));
    }
    let idx = words
        .iter()
        .map(|w| e.vocab().get(w).ok_or_else(|| Error::UnknownWord(w.clone())))
        .collect::<Result<Vec<_>>>()?;
    let snapshot: &Embedding = e;
    let rows = par::map(&idx, |&i| {
        let dec = decompose(snapshot.row(i), b)?;
        let n = norm(&dec.orthogonal);
        if n < 1e-12 {
            return Err(Error::numeric(format!(
                "'{}' lies entirely in the bias subspace",
                snapshot.vocab().word(i)
            )));
        }
        Ok(dec.orthogonal.into_iter().map(|x| x / n).collect::<Vec<_>>())
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    for (&i, row) in idx.iter().zip(rows) {
        e.row_mut(i).copy_from_slice(&row);
    }
    Ok(idx.len())
}

pub fn equalize_state(a: &[f64], b: &[f64], sub: &GenderSubspace) -> EqualizeState {
    let mu: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
    let mu_b = sub.project(&mu);
    let nu = mu.iter().zip(&mu_b).map(|(m, p)| m - p).collect();
    EqualizeState { mu, mu_b, nu }
}

fn equalized_vector(w: &[f64], state: &EqualizeState, sub: &GenderSubspace) -> Result<Vec<f64>> {
    let nu_sq = dot(&state.nu, &state.nu);
    if nu_sq > 1.0 {
        return Err(Error::numeric(format!(
            "|nu| = {} exceeds 1; equalise needs unit-scale inputs",
            nu_sq.sqrt()
        )));
    }
    let w_b = sub.project(w);
    let dir: Vec<f64> = w_b.iter().zip(&state.mu_b).map(|(x, m)| x - m).collect();
    let dn = norm(&dir);
    if dn < 1e-12 {
        return Err(Error::numeric(
            "pair member coincides with the pair mean inside the subspace",
        ));
    }
    let scale = (1.0 - nu_sq).sqrt() / dn;
    Ok(state
        .nu
        .iter()
        .zip(&dir)
        .map(|(n, d)| n + scale * d)
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EqualizeOutcome {
    pub equalized: usize,
    pub skipped: Vec<WordPair>,
}

/// Equalises each pair whose members both resolve; other pairs are skipped.
pub fn equalize(e: &mut Embedding, b: &GenderSubspace, pairs: &[WordPair]) -> Result<EqualizeOutcome> {
    let mut out = EqualizeOutcome::default();
    for pair in pairs {
        let Some((ia, ib)) = resolve_pair(e, pair) else {
            out.skipped.push(pair.clone());
            continue;
        };
        if ia == ib {
            out.skipped.push(pair.clone());
            continue;
        }
        let state = equalize_state(e.row(ia), e.row(ib), b);
        let new_a = equalized_vector(e.row(ia), &state, b)?;
        let new_b = equalized_vector(e.row(ib), &state, b)?;
        e.row_mut(ia).copy_from_slice(&new_a);
        e.row_mut(ib).copy_from_slice(&new_b);
        out.equalized += 1;
    }
    if !out.skipped.is_empty() {
        warn!("equalise: skipped {} pairs not in vocabulary", out.skipped.len());
    }
    Ok(out)
}

/// Logistic-regression decision rule over unit-normalised vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn score(&self, x: &[f64]) -> f64 {
        let n = norm(x);
        let n = if n > 0.0 { n } else { 1.0 };
        dot(&self.weights, x) / n + self.bias
    }

    /// Gender-specific iff the logistic probability is strictly above 0.5.
    pub fn is_specific(&self, x: &[f64]) -> bool {
        self.score(x) > 0.0
    }

    /// L2-regularised logistic regression by full-batch gradient descent,
    /// classes weighted equally.
    pub fn train(positives: &[&[f64]], negatives: &[&[f64]]) -> Result<Self> {
        if positives.len() < 2 || negatives.len() < 2 {
            return Err(Error::invalid(
                "the expansion classifier needs at least 2 examples per class",
            ));
        }
        let d = positives[0].len();
        let unit = |v: &[f64]| {
            let n = norm(v);
            v.iter().map(|x| if n > 0.0 { x / n } else { 0.0 }).collect::<Vec<_>>()
        };
        let data: Vec<(Vec<f64>, f64, f64)> = positives
            .iter()
            .map(|v| (unit(v), 1.0, 0.5 / positives.len() as f64))
            .chain(
                negatives
                    .iter()
                    .map(|v| (unit(v), 0.0, 0.5 / negatives.len() as f64)),
            )
            .collect();
        const LAMBDA: f64 = 1e-3;
        const RATE: f64 = 2.0;
        let mut w = vec![0.0; d];
        let mut bias = 0.0;
        for _ in 0..3000 {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (x, y, weight) in &data {
                let p = 1.0 / (1.0 + (-(dot(&w, x) + bias)).exp());
                let g = (p - y) * weight;
                gw.iter_mut().zip(x).for_each(|(gi, xi)| *gi += g * xi);
                gb += g;
            }
            let mut step = 0.0;
            for (wi, gi) in w.iter_mut().zip(&gw) {
                let delta = RATE * (gi + LAMBDA * *wi);
                *wi -= delta;
                step += delta * delta;
            }
            bias -= RATE * gb;
            if step.sqrt() < 1e-9 && (RATE * gb).abs() < 1e-9 {
                break;
            }
        }
        Ok(Self { weights: w, bias })
    }
}

/// Expands a seed set of gender-specific words with a linear classifier
/// trained on the seeds. Returns the expanded set in vocabulary order.
pub fn expand_gender_specific(
    e: &Embedding,
    seed_specific: &[String],
    seed_neutral: &[String],
) -> Result<Vec<String>> {
    let specific: HashSet<usize> = seed_specific.iter().filter_map(|w| e.resolve(w)).collect();
    let neutral: HashSet<usize> = seed_neutral.iter().filter_map(|w| e.resolve(w)).collect();
    if let Some(i) = specific.intersection(&neutral).next() {
        return Err(Error::invalid(format!(
            "'{}' is in both seed sets",
            e.vocab().word(*i)
        )));
    }
    let mut pos: Vec<usize> = specific.iter().copied().collect();
    let mut neg: Vec<usize> = neutral.iter().copied().collect();
    pos.sort_unstable();
    neg.sort_unstable();
    let clf = LinearClassifier::train(
        &pos.iter().map(|&i| e.row(i)).collect::<Vec<_>>(),
        &neg.iter().map(|&i| e.row(i)).collect::<Vec<_>>(),
    )?;
    let flags = par::map_range(e.len(), |i| {
        specific.contains(&i) || (!neutral.contains(&i) && clf.is_specific(e.row(i)))
    });
    Ok(flags
        .into_iter()
        .enumerate()
        .filter(|(_, f)| *f)
        .map(|(i, _)| e.vocab().word(i).to_string())
        .collect())
}

fn default_neutral_seed(e: &Embedding, exclude: &HashSet<usize>, count: usize) -> Vec<String> {
    (0..e.len())
        .filter(|i| !exclude.contains(i))
        .take(count)
        .map(|i| e.vocab().word(i).to_string())
        .collect()
}

/// Runs a full WED variant and returns the debiased embedding.
///
/// The input is unit-normalised first. `names` supplies the extra equalise
/// pairs for nWED70 and is ignored by the other variants.
pub fn run_wed(
    e: &Embedding,
    sets: &WedWordSets,
    variant: WedVariant,
    names: Option<&NamePairing>,
) -> Result<(Embedding, WedReport)> {
    let mut out = e.normalized();

    let definitional: Vec<WordPair> = sets
        .definitional
        .iter()
        .filter(|p| resolve_pair(&out, p).is_some())
        .cloned()
        .collect();
    if definitional.len() < sets.definitional.len() {
        warn!(
            "{} definitional pairs not in vocabulary",
            sets.definitional.len() - definitional.len()
        );
    }
    let sub = compute_bias_subspace(&out, &definitional, variant.selector())?;

    let mut equalise = sets.equalise.clone();
    if variant == WedVariant::NWed70 {
        let pairing = names.ok_or_else(|| {
            Error::MissingResource("nWED70 requires a name pairing".to_string())
        })?;
        equalise.extend(pairing.pairs().iter().cloned());
    }

    let mut gendered: HashSet<usize> = HashSet::new();
    for (a, b) in definitional.iter().chain(&equalise) {
        gendered.extend(out.resolve(a));
        gendered.extend(out.resolve(b));
    }
    let seed_idx: HashSet<usize> = sets
        .gender_specific_seed
        .iter()
        .filter_map(|w| out.resolve(w))
        .collect();
    let specific: HashSet<usize> = if sets.expand {
        let seed_words: Vec<String> = seed_idx.iter().map(|&i| out.vocab().word(i).to_string()).collect();
        let neutral_seed = match &sets.neutral_seed {
            Some(n) => n.clone(),
            None => {
                let exclude: HashSet<usize> = seed_idx.union(&gendered).copied().collect();
                default_neutral_seed(&out, &exclude, 4 * seed_idx.len().max(1))
            }
        };
        expand_gender_specific(&out, &seed_words, &neutral_seed)?
            .iter()
            .filter_map(|w| out.vocab().get(w))
            .collect()
    } else {
        seed_idx
    };
    let neutral: Vec<String> = (0..out.len())
        .filter(|i| !specific.contains(i) && !gendered.contains(i))
        .map(|i| out.vocab().word(i).to_string())
        .collect();
    let gender_specific = out.len() - neutral.len();

    let neutralized = neutralize(&mut out, &sub, &neutral)?;
    let eq = equalize(&mut out, &sub, &equalise)?;

    let report = WedReport {
        variant,
        k: sub.k(),
        variance_fraction: sub.variance_fraction,
        spectrum_shares: sub.spectrum_shares.clone(),
        definitional_pairs_used: definitional.len(),
        gender_specific,
        neutralized,
        equalise_pairs: equalise.len(),
        equalized: eq.equalized,
        equalise_skipped: eq.skipped.len(),
    };
    Ok((out, report))
}

/// Eigenvalue shares of the definitional-pair covariance next to those of an
/// equal number of random unit-vector pairs.
pub fn variance_explained(pairs: &[WordPair], e: &Embedding, seed: u64) -> Result<SpectrumReport> {
    let sub = compute_bias_subspace(e, pairs, ComponentSelector::Fixed(1))?;
    let d = e.dim();
    let mut rng = seed::rng(seed);
    let mut rows = Vec::with_capacity(pairs.len() * 2);
    for i in 0..pairs.len() * 2 {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        rows.push((format!("r{i}"), v.into_iter().map(|x| x / n).collect()));
    }
    let random = Embedding::from_rows(rows)?;
    let random_pairs: Vec<WordPair> = (0..pairs.len())
        .map(|i| (format!("r{}", 2 * i), format!("r{}", 2 * i + 1)))
        .collect();
    let baseline = compute_bias_subspace(&random, &random_pairs, ComponentSelector::Fixed(1))?;
    Ok(SpectrumReport {
        definitional: sub.spectrum_shares,
        random_baseline: baseline.spectrum_shares,
    })
}
