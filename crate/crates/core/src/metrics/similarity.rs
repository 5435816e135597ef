use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::embedding::{cosine, Embedding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub first: String,
    pub second: String,
    pub score: f64,
}

/// Parses `word1 word2 score` rows split on tabs, commas or spaces. A leading
/// header row and `#` comments are skipped; rows with a part-of-speech column
/// before the score (`word1 word2 POS score ...`) are accepted.
pub fn parse_judgements(text: &str) -> Result<Vec<Judgement>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == '\t' || c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let score = fields
            .get(2)
            .and_then(|f| f.parse::<f64>().ok())
            .or_else(|| fields.get(3).and_then(|f| f.parse::<f64>().ok()));
        match (fields.len() >= 3, score) {
            (true, Some(score)) if score.is_finite() => out.push(Judgement {
                first: fields[0].to_string(),
                second: fields[1].to_string(),
                score,
            }),
            _ if out.is_empty() && i == 0 => continue,
            _ => return Err(Error::parse(i + 1, "expected 'word1 word2 score'")),
        }
    }
    Ok(out)
}

/// Ranks from 1, ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("need at least two observations"));
    }
    pearson(&average_ranks(x), &average_ranks(y)).ok_or_else(|| Error::numeric("constant ranks"))
}

/// Two-sided p from the t approximation with `n - 2` degrees of freedom.
pub fn spearman_p(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub r_s: f64,
    pub p_two_sided: f64,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
}

pub fn similarity_eval(e: &Embedding, judgements: &[Judgement]) -> Result<SpearmanResult> {
    let mut human = Vec::new();
    let mut model = Vec::new();
    for j in judgements {
        if let (Some(a), Some(b)) = (e.resolve(&j.first), e.resolve(&j.second)) {
            if let Ok(c) = cosine(e.row(a), e.row(b)) {
                human.push(j.score);
                model.push(c);
            }
        }
    }
    if human.len() < 3 {
        return Err(Error::invalid(format!(
            "only {} judgement pairs resolve; at least 3 needed",
            human.len()
        )));
    }
    let r = spearman(&human, &model)?;
    Ok(SpearmanResult {
        r_s: r,
        p_two_sided: spearman_p(r, human.len()),
        pairs_evaluated: human.len(),
        pairs_skipped: judgements.len() - human.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn monotone_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &[2.0, 4.0, 8.0, 16.0, 32.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(spearman(&x, &[1.0; 5]).is_err());
    }

    #[test]
    fn t_approximation_p() {
        // r = 0.5, n = 12: t = 0.5 * sqrt(10 / 0.75) = 1.8257, two-sided p = 0.0979.
        assert!((spearman_p(0.5, 12) - 0.0979).abs() < 1e-3);
        assert_eq!(spearman_p(1.0, 10), 0.0);
    }

    #[test]
    fn parses_formats() {
        let simlex = "word1\tword2\tPOS\tSimLex999\tconc(w1)\nold\tnew\tA\t1.58\t2.72\nsmart\tintelligent\tA\t9.2\t1.75\n";
        let j = parse_judgements(simlex).unwrap();
        assert_eq!(j.len(), 2);
        assert_eq!(j[1].score, 9.2);
        let csv = "tiger,cat,7.35\n# note\nbook paper 7.46\n";
        assert_eq!(parse_judgements(csv).unwrap().len(), 2);
        assert!(parse_judgements("a b 1\nc d\n").is_err());
    }

    #[test]
    fn evaluates_embedding() {
        let e = Embedding::from_rows(vec![
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.1]),
            ("c", vec![1.0, 1.0]),
            ("d", vec![0.0, 1.0]),
        ])
        .unwrap();
        let j = parse_judgements("a b 9\na c 5\na d 1\nx y 3\n").unwrap();
        let r = similarity_eval(&e, &j).unwrap();
        assert_eq!(r.r_s, 1.0);
        assert_eq!((r.pairs_evaluated, r.pairs_skipped), (3, 1));
    }
}
