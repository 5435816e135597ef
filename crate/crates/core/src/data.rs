//! Word lists and test sets shipped with the library, plus readers for the
//! plain-text list formats.

use crate::error::{Error, Result};
use crate::intervention::GenderPairLexicon;
use crate::metrics::{parse_analogies, AnalogySection, WeatTest};
use crate::subspace::{WedWordSets, WordPair};

pub const DEFINITIONAL_TSV: &str = include_str!("../data/definitional.tsv");
pub const EQUALISE_TSV: &str = include_str!("../data/equalise.tsv");
pub const GENDER_SPECIFIC_SEED_TXT: &str = include_str!("../data/gender_specific_seed.txt");
pub const LEXICON_TSV: &str = include_str!("../data/lexicon.tsv");
pub const GOOGLE_FAMILY_TXT: &str = include_str!("../data/google_family.txt");
pub const WEAT_JSON: [&str; 3] = [
    include_str!("../data/weat/art_maths.json"),
    include_str!("../data/weat/arts_sciences.json"),
    include_str!("../data/weat/careers_family.json"),
];

/// Reads `first<TAB>second` pairs; blank lines and `#` comments are skipped.
pub fn read_pairs(text: &str) -> Result<Vec<WordPair>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                out.push((a.to_string(), b.to_string()))
            }
            _ => return Err(Error::parse(i + 1, "expected 'first<TAB>second'")),
        }
    }
    Ok(out)
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn read_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn definitional_pairs() -> Vec<WordPair> {
    read_pairs(DEFINITIONAL_TSV).expect("shipped definitional pairs parse")
}

pub fn equalise_pairs() -> Vec<WordPair> {
    read_pairs(EQUALISE_TSV).expect("shipped equalise pairs parse")
}

pub fn gender_specific_seed() -> Vec<String> {
    read_word_list(GENDER_SPECIFIC_SEED_TXT)
}

pub fn lexicon() -> GenderPairLexicon {
    GenderPairLexicon::read_tsv(LEXICON_TSV.as_bytes()).expect("shipped lexicon is valid")
}

pub fn weat_tests() -> Vec<WeatTest> {
    WEAT_JSON
        .iter()
        .map(|j| WeatTest::from_json(j).expect("shipped WEAT sets are valid"))
        .collect()
}

pub fn weat_test(name: &str) -> Option<WeatTest> {
    weat_tests().into_iter().find(|t| t.name == name)
}

pub fn family_analogies() -> Vec<AnalogySection> {
    parse_analogies(GOOGLE_FAMILY_TXT).expect("shipped analogies parse")
}

/// Unique unordered word pairs appearing as `a b` or `c d` in the family
/// subset, in first-appearance order.
pub fn family_pairs_from(sections: &[AnalogySection]) -> Vec<WordPair> {
    let mut out: Vec<WordPair> = Vec::new();
    for s in sections.iter().filter(|s| s.name == "family") {
        for q in &s.questions {
            for (a, b) in [(&q.a, &q.b), (&q.c, &q.expected)] {
                let known = out
                    .iter()
                    .any(|(x, y)| (x == a && y == b) || (x == b && y == a));
                if !known {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
    }
    out
}

pub fn family_pairs() -> Vec<WordPair> {
    family_pairs_from(&family_analogies())
}

/// Default WED word sets with classifier expansion enabled.
pub fn default_wed_sets() -> WedWordSets {
    WedWordSets {
        definitional: definitional_pairs(),
        equalise: equalise_pairs(),
        gender_specific_seed: gender_specific_seed(),
        neutral_seed: None,
        expand: true,
    }
}
