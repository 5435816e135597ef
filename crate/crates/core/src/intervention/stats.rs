use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::corpus::Document;
use crate::error::Result;
use crate::text::normalize_token;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub types: usize,
    pub tokens: usize,
    pub type_token_ratio: f64,
    /// Share of types whose total count is even.
    pub even_fraction: f64,
}

/// Normalised token counts, as the trainer would see them.
pub fn token_counts(docs: &[Document]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for d in docs {
        for t in d.tokens() {
            let n = normalize_token(&t.surface);
            if !n.is_empty() {
                *counts.entry(n).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub fn corpus_stats(docs: &[Document]) -> CorpusStats {
    let counts = token_counts(docs);
    let types = counts.len();
    let tokens = counts.values().sum::<u64>() as usize;
    let even = counts.values().filter(|&&c| c % 2 == 0).count();
    CorpusStats {
        documents: docs.len(),
        types,
        tokens,
        type_token_ratio: if tokens == 0 { 0.0 } else { types as f64 / tokens as f64 },
        even_fraction: if types == 0 { 0.0 } else { even as f64 / types as f64 },
    }
}

/// One document per line, normalised tokens separated by single spaces.
pub fn write_training_text<W: Write>(docs: &[Document], mut w: W) -> Result<()> {
    for d in docs {
        let mut first = true;
        for t in d.tokens() {
            let n = normalize_token(&t.surface);
            if n.is_empty() {
                continue;
            }
            if !first {
                w.write_all(b" ")?;
            }
            w.write_all(n.as_bytes())?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn training_text(docs: &[Document]) -> String {
    let mut buf = Vec::new();
    write_training_text(docs, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("tokens are UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervention::corpus::AnnotatedToken;

    fn doc(id: &str, words: &[&str]) -> Document {
        Document {
            id: id.into(),
            sentences: vec![words.iter().map(|w| AnnotatedToken::new(*w, "NN")).collect()],
        }
    }

    #[test]
    fn counts_small_corpus() {
        let s = corpus_stats(&[doc("a", &["a", "a", "b"])]);
        assert_eq!((s.types, s.tokens), (2, 3));
        assert!((s.type_token_ratio - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.even_fraction, 0.5);
    }

    #[test]
    fn training_text_normalises() {
        let docs = [doc("a", &["Mary's", "e-mail", ",", "foo_bar"]), doc("b", &["X"])];
        assert_eq!(training_text(&docs), "marys e-mail foo_bar\nx\n");
    }
}
