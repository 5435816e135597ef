//! Best-effort annotation for raw text when no external tagger output exists.

use super::corpus::{AnnotatedToken, Document, Ner};
use crate::names::NamePairing;
use crate::text::titlecase;

const CLOSED_CLASS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "because",
    "been", "before", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from",
    "had", "has", "have", "he", "her", "here", "hers", "him", "himself", "his", "how", "i", "if",
    "in", "into", "is", "it", "its", "may", "me", "might", "must", "my", "no", "nor", "not", "now",
    "of", "off", "on", "once", "or", "our", "out", "over", "she", "should", "so", "some", "than",
    "that", "the", "their", "them", "then", "there", "these", "they", "this", "those", "though",
    "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "would", "yet", "you", "your",
];

fn is_punct(tok: &str) -> bool {
    tok.chars().all(|c| c.is_ascii_punctuation())
}

fn is_sentence_end(tok: &str) -> bool {
    matches!(tok, "." | "!" | "?")
}

/// Splits on whitespace and peels leading/trailing punctuation into tokens.
fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in line.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        while start < chars.len() && chars[start].is_ascii_punctuation() {
            out.push(chars[start].to_string());
            start += 1;
        }
        let mut end = chars.len();
        while end > start && chars[end - 1].is_ascii_punctuation() {
            end -= 1;
        }
        if end > start {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    out
}

fn noun_like(next: Option<&String>) -> bool {
    match next {
        Some(t) => !is_punct(t) && !CLOSED_CLASS.contains(&t.to_lowercase().as_str()),
        None => false,
    }
}

fn tag(tok: &str, next: Option<&String>, initial: bool, gazetteer: &NamePairing) -> AnnotatedToken {
    let lower = tok.to_lowercase();
    let capitalised = tok.chars().next().is_some_and(char::is_uppercase);
    let mut t = AnnotatedToken::new(tok, "NN");
    if is_punct(tok) {
        t.pos = tok.to_string();
    } else if matches!(lower.as_str(), "he" | "she" | "him" | "himself" | "herself" | "hers") {
        t.pos = "PRP".into();
    } else if lower == "her" || lower == "his" {
        t.pos = if noun_like(next) { "PRP$" } else { "PRP" }.into();
    } else if capitalised && gazetteer.contains(&titlecase(tok)) {
        t.pos = "NNP".into();
        t.ner = Ner::Person;
    } else if capitalised && !initial {
        t.pos = "NNP".into();
    }
    t
}

/// Annotates raw text; documents are separated by blank lines.
pub fn heuristic_annotate(text: &str, gazetteer: &NamePairing) -> Vec<Document> {
    let mut docs = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let flush = |tokens: &mut Vec<String>, docs: &mut Vec<Document>| {
        if tokens.is_empty() {
            return;
        }
        let mut sentences = Vec::new();
        let mut sentence = Vec::new();
        for (i, tok) in tokens.iter().enumerate() {
            let initial = sentence.is_empty();
            sentence.push(tag(tok, tokens.get(i + 1), initial, gazetteer));
            if is_sentence_end(tok) {
                sentences.push(std::mem::take(&mut sentence));
            }
        }
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
        docs.push(Document {
            id: format!("d{}", docs.len()),
            sentences,
        });
        tokens.clear();
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut docs);
        } else {
            current.extend(tokenize(line));
        }
    }
    flush(&mut current, &mut docs);
    docs
}
