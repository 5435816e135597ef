use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::embedding::{dot, norm, Embedding};
use crate::error::{Error, Result};
use crate::subspace::{compute_bias_subspace, ComponentSelector, WordPair};

/// Unit gender direction, oriented so the first word of each pair projects higher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasDirection {
    pub direction: Vec<f64>,
    pub pairs_used: usize,
    pub pairs_skipped: Vec<WordPair>,
}

pub fn bias_direction(e: &Embedding, pairs: &[WordPair]) -> Result<BiasDirection> {
    let (usable, skipped): (Vec<WordPair>, Vec<WordPair>) = pairs
        .iter()
        .cloned()
        .partition(|(a, b)| e.resolve(a).is_some() && e.resolve(b).is_some());
    if !skipped.is_empty() {
        warn!("bias direction: skipped {} pairs with missing words", skipped.len());
    }
    if usable.is_empty() {
        return Err(Error::invalid("no resolvable pair for the bias direction"));
    }
    let normed = e.normalized();
    let sub = compute_bias_subspace(&normed, &usable, ComponentSelector::Fixed(1))?;
    let mut direction = sub.basis.into_iter().next().expect("k = 1");
    let lean: f64 = usable
        .iter()
        .map(|(a, b)| {
            let (va, vb) = (normed.try_vector(a), normed.try_vector(b));
            match (va, vb) {
                (Ok(va), Ok(vb)) => dot(va, &direction) - dot(vb, &direction),
                _ => 0.0,
            }
        })
        .sum();
    if lean < 0.0 {
        direction.iter_mut().for_each(|x| *x = -*x);
    }
    let n = norm(&direction);
    direction.iter_mut().for_each(|x| *x /= n);
    Ok(BiasDirection {
        direction,
        pairs_used: usable.len(),
        pairs_skipped: skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Most similar to `+b`.
    Positive,
    /// Most similar to `-b`.
    Negative,
}

impl Side {
    pub fn label(self) -> usize {
        match self {
            Side::Positive => 0,
            Side::Negative => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledWord {
    pub word: String,
    pub side: Side,
}

/// The `n` words most similar to `+b` and the `n` most similar to `-b`.
pub fn select_biased_words(e: &Embedding, b: &BiasDirection, n_per_side: usize) -> Result<Vec<LabeledWord>> {
    if n_per_side == 0 {
        return Err(Error::Config("n_per_side must be positive".into()));
    }
    if e.len() < 2 * n_per_side {
        return Err(Error::invalid(format!(
            "vocabulary of {} words cannot supply {} per side",
            e.len(),
            n_per_side
        )));
    }
    let pos = e.nearest_to_vector(&b.direction, n_per_side, &HashSet::new())?;
    let taken: HashSet<usize> = pos.iter().filter_map(|(w, _)| e.vocab().get(w)).collect();
    let neg_dir: Vec<f64> = b.direction.iter().map(|x| -x).collect();
    let neg = e.nearest_to_vector(&neg_dir, n_per_side, &taken)?;
    if pos.len() < n_per_side || neg.len() < n_per_side {
        return Err(Error::invalid("not enough nonzero vectors to fill both sides"));
    }
    Ok(pos
        .into_iter()
        .map(|(word, _)| LabeledWord {
            word,
            side: Side::Positive,
        })
        .chain(neg.into_iter().map(|(word, _)| LabeledWord {
            word,
            side: Side::Negative,
        }))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_selection() {
        let e = Embedding::from_rows(vec![
            ("first", vec![0.9, 0.1]),
            ("second", vec![-0.8, 0.2]),
            ("third", vec![0.0, 1.0]),
        ])
        .unwrap();
        let b = BiasDirection {
            direction: vec![1.0, 0.0],
            pairs_used: 1,
            pairs_skipped: vec![],
        };
        let sel = select_biased_words(&e, &b, 1).unwrap();
        assert_eq!(sel[0].word, "first");
        assert_eq!(sel[0].side, Side::Positive);
        assert_eq!(sel[1].word, "second");
        assert_eq!(sel[1].side, Side::Negative);
        assert!(select_biased_words(&e, &b, 2).is_err());
    }

    #[test]
    fn direction_is_unit_and_separates_clusters() {
        let mut rows = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..6 {
            let jitter = 0.05 * i as f64;
            rows.push((format!("m{i}"), vec![1.0, jitter, 0.3]));
            rows.push((format!("f{i}"), vec![-1.0, jitter, 0.3]));
            pairs.push((format!("m{i}"), format!("f{i}")));
        }
        pairs.push(("m0".into(), "absent".into()));
        let e = Embedding::from_rows(rows).unwrap();
        let b = bias_direction(&e, &pairs).unwrap();
        assert!((norm(&b.direction) - 1.0).abs() < 1e-10);
        assert_eq!(b.pairs_used, 6);
        assert_eq!(b.pairs_skipped.len(), 1);
        for i in 0..6 {
            assert!(dot(e.vector(&format!("m{i}")).unwrap(), &b.direction) > 0.0);
            assert!(dot(e.vector(&format!("f{i}")).unwrap(), &b.direction) < 0.0);
        }
    }
}
