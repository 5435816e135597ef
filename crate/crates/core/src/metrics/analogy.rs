use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::embedding::{norm, Embedding};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogySection {
    pub name: String,
    pub questions: Vec<AnalogyQuestion>,
}

/// Parses the Google analogy format: `: section` headers, then `a b c d` rows.
pub fn parse_analogies(text: &str) -> Result<Vec<AnalogySection>> {
    let mut sections: Vec<AnalogySection> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            sections.push(AnalogySection {
                name: name.trim().to_string(),
                questions: Vec::new(),
            });
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::parse(i + 1, format!("expected 4 words, found {}", words.len())));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::parse(i + 1, "analogy row before any ': section' header"))?;
        section.questions.push(AnalogyQuestion {
            a: words[0].to_string(),
            b: words[1].to_string(),
            c: words[2].to_string(),
            expected: words[3].to_string(),
        });
    }
    Ok(sections)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        v.to_vec()
    }
}

/// 3CosAdd over an already unit-normalised embedding.
fn complete_normalized(e: &Embedding, a: usize, b: usize, c: usize) -> Result<String> {
    let target: Vec<f64> = (0..e.dim())
        .map(|k| e.row(b)[k] - e.row(a)[k] + e.row(c)[k])
        .collect();
    let exclude: HashSet<usize> = [a, b, c].into_iter().collect();
    let target = if norm(&target) > 0.0 { target } else { e.row(c).to_vec() };
    e.nearest_to_vector(&target, 1, &exclude)?
        .into_iter()
        .next()
        .map(|(w, _)| w)
        .ok_or_else(|| Error::invalid("no candidate word outside the query"))
}

/// `a : b :: c : ?` by argmax of cosine with `b - a + c` on unit vectors.
pub fn analogy_complete(e: &Embedding, a: &str, b: &str, c: &str) -> Result<String> {
    let idx = |w: &str| e.resolve(w).ok_or_else(|| Error::UnknownWord(w.to_string()));
    let (ia, ib, ic) = (idx(a)?, idx(b)?, idx(c)?);
    let rows: Vec<(String, Vec<f64>)> = e
        .vocab()
        .words()
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), unit(e.row(i))))
        .collect();
    let normed = Embedding::from_rows(rows)?;
    complete_normalized(&normed, ia, ib, ic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogyReport {
    pub subset: String,
    pub total: usize,
    pub evaluated: usize,
    pub correct: usize,
    pub skipped: usize,
    /// Percentage of evaluated rows answered wrongly; `None` when nothing was evaluated.
    pub error_rate: Option<f64>,
    /// Per-row outcome over evaluated rows, in file order.
    pub outcomes: Vec<bool>,
}

pub fn family_analogy_suite(e: &Embedding, sections: &[AnalogySection], subset: &str) -> Result<AnalogyReport> {
    let section = sections
        .iter()
        .find(|s| s.name == subset)
        .ok_or_else(|| Error::Config(format!("unknown analogy subset '{subset}'")))?;
    let normed = e.normalized();
    let resolved: Vec<Option<[usize; 4]>> = section
        .questions
        .iter()
        .map(|q| {
            Some([
                e.resolve(&q.a)?,
                e.resolve(&q.b)?,
                e.resolve(&q.c)?,
                e.resolve(&q.expected)?,
            ])
        })
        .collect();
    let rows: Vec<[usize; 4]> = resolved.iter().flatten().copied().collect();
    let outcomes = par::map(&rows, |&[a, b, c, d]| {
        complete_normalized(&normed, a, b, c).map(|w| w == e.vocab().word(d))
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    let correct = outcomes.iter().filter(|&&o| o).count();
    let evaluated = outcomes.len();
    Ok(AnalogyReport {
        subset: subset.to_string(),
        total: section.questions.len(),
        evaluated,
        correct,
        skipped: section.questions.len() - evaluated,
        error_rate: (evaluated > 0).then(|| 100.0 * (evaluated - correct) as f64 / evaluated as f64),
        outcomes,
    })
}
