use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Symmetric lookup over lowercase gendered word pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderPairLexicon {
    pairs: Vec<(String, String)>,
    map: HashMap<String, String>,
}

impl GenderPairLexicon {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        let mut map = HashMap::with_capacity(pairs.len() * 2);
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(a, b)| (a.to_lowercase(), b.to_lowercase()))
            .collect();
        for (a, b) in &pairs {
            if a == b {
                return Err(Error::invalid(format!("lexicon maps '{a}' to itself")));
            }
            for (x, y) in [(a, b), (b, a)] {
                if map.insert(x.clone(), y.clone()).is_some() {
                    return Err(Error::Duplicate(format!("lexicon word '{x}'")));
                }
            }
        }
        Ok(Self { pairs, map })
    }

    /// Reads `form_a<TAB>form_b` lines; `#` starts a comment.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                    pairs.push((a.to_string(), b.to_string()))
                }
                _ => return Err(Error::parse(i + 1, "expected 'form_a<TAB>form_b'")),
            }
        }
        Self::new(pairs)
    }

    pub fn counterpart(&self, lowercase: &str) -> Option<&str> {
        self.map.get(lowercase).map(String::as_str)
    }

    pub fn contains(&self, lowercase: &str) -> bool {
        self.map.contains_key(lowercase)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_validated() {
        let lex = GenderPairLexicon::read_tsv("# c\nman\twoman\nKing\tqueen\n".as_bytes()).unwrap();
        assert_eq!(lex.counterpart("woman"), Some("man"));
        assert_eq!(lex.counterpart("king"), Some("queen"));
        assert!(GenderPairLexicon::read_tsv("man\twoman\nman\tlady\n".as_bytes()).is_err());
        assert!(GenderPairLexicon::read_tsv("man\tman\n".as_bytes()).is_err());
        assert!(GenderPairLexicon::read_tsv("man woman\n".as_bytes()).is_err());
    }

    #[test]
    fn shipped_lexicon_is_an_involution() {
        let lex = crate::data::lexicon();
        assert!(lex.len() >= 100);
        for (a, b) in lex.pairs() {
            assert_eq!(lex.counterpart(lex.counterpart(a).unwrap()), Some(a.as_str()));
            assert_eq!(lex.counterpart(b), Some(a.as_str()));
        }
        assert!(!lex.contains("him"), "object pronoun is handled by the POS rules only");
    }
}
