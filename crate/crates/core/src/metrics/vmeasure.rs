use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `H(A | B)` from the joint table.
fn conditional_entropy(joint: &BTreeMap<(usize, usize), usize>, b_counts: &BTreeMap<usize, usize>, n: f64, a_first: bool) -> f64 {
    joint
        .iter()
        .map(|(&(p, g), &c)| {
            let b = if a_first { p } else { g };
            let nb = b_counts[&b] as f64;
            let c = c as f64;
            -(c / n) * (c / nb).ln()
        })
        .sum()
}

pub fn v_measure(predicted: &[usize], gold: &[usize]) -> Result<VMeasure> {
    if predicted.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            actual: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::invalid("empty labelling"));
    }
    let n = gold.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pc: BTreeMap<usize, usize> = BTreeMap::new();
    let mut gc: BTreeMap<usize, usize> = BTreeMap::new();
    for (&p, &g) in predicted.iter().zip(gold) {
        *joint.entry((p, g)).or_insert(0) += 1;
        *pc.entry(p).or_insert(0) += 1;
        *gc.entry(g).or_insert(0) += 1;
    }
    let h_gold = entropy(gc.values().copied(), n);
    let h_pred = entropy(pc.values().copied(), n);
    let h_gold_given_pred = conditional_entropy(&joint, &pc, n, true);
    let h_pred_given_gold = conditional_entropy(&joint, &gc, n, false);
    let homogeneity = if h_gold == 0.0 { 1.0 } else { 1.0 - h_gold_given_pred / h_gold };
    let completeness = if h_pred == 0.0 { 1.0 } else { 1.0 - h_pred_given_gold / h_pred };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok(VMeasure {
        homogeneity,
        completeness,
        v_measure: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let r = v_measure(&[0, 1, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert!((r.v_measure - 0.3437).abs() < 1e-4, "{}", r.v_measure);
        let r = v_measure(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.homogeneity, 0.0);
        assert_eq!(r.v_measure, 0.0);
        let r = v_measure(&[5, 5, 2, 2], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.v_measure, 1.0);
        assert!(v_measure(&[0], &[0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_symmetric(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..60)) {
            let (p, g): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let a = v_measure(&p, &g).unwrap();
            let b = v_measure(&g, &p).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a.v_measure));
            prop_assert!((a.homogeneity - b.completeness).abs() < 1e-12);
            prop_assert!((a.v_measure - b.v_measure).abs() < 1e-12);
        }
    }
}
