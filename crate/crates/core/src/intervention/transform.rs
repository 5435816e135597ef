use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::corpus::{AnnotatedToken, Document, Ner};
use super::lexicon::GenderPairLexicon;
use crate::error::{Error, Result};
use crate::names::NamePairing;
use crate::text::{mirror_case, titlecase};
use crate::{par, seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    Grammar,
    Names,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Append a transformed copy of every document (CDA).
    #[serde(alias = "cda")]
    Augment,
    /// Replace documents by their transform with a fixed probability (CDS).
    #[serde(alias = "cds")]
    Substitute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionConfig {
    pub mode: Mode,
    pub strategy: Strategy,
    pub substitution_probability: f64,
    pub seed: u64,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Naive,
            strategy: Strategy::Augment,
            substitution_probability: 0.5,
            seed: 0,
        }
    }
}

/// A configured counterfactual rewriter.
#[derive(Debug, Clone)]
pub struct Intervention<'a> {
    lexicon: &'a GenderPairLexicon,
    pairing: Option<&'a NamePairing>,
    config: InterventionConfig,
}

pub const COUNTERFACTUAL_SUFFIX: &str = "~cf";

#[derive(Debug, Clone, PartialEq)]
pub struct CdsOutput {
    pub documents: Vec<Document>,
    pub substituted: usize,
}

impl CdsOutput {
    pub fn substituted_fraction(&self) -> f64 {
        if self.documents.is_empty() {
            0.0
        } else {
            self.substituted as f64 / self.documents.len() as f64
        }
    }
}

/// Object/possessive pronoun rules keyed on POS.
fn pronoun_rule(lower: &str, pos: &str) -> Option<&'static str> {
    match (lower, pos) {
        ("her", "PRP") => Some("him"),
        ("her", "PRP$") => Some("his"),
        ("his", "PRP$") => Some("her"),
        ("his", "PRP") => Some("hers"),
        ("him", "PRP") => Some("her"),
        ("hers", _) => Some("his"),
        _ => None,
    }
}

impl<'a> Intervention<'a> {
    pub fn new(
        lexicon: &'a GenderPairLexicon,
        pairing: Option<&'a NamePairing>,
        config: InterventionConfig,
    ) -> Result<Self> {
        let p = config.substitution_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("substitution probability {p} outside [0, 1]")));
        }
        if config.mode == Mode::Names && pairing.is_none() {
            return Err(Error::MissingResource(
                "names mode requires a name pairing".into(),
            ));
        }
        Ok(Self {
            lexicon,
            pairing,
            config,
        })
    }

    pub fn config(&self) -> &InterventionConfig {
        &self.config
    }

    fn vetoed_chains(&self, doc: &Document) -> HashSet<u32> {
        if self.config.mode != Mode::Grammar {
            return HashSet::new();
        }
        doc.tokens()
            .filter(|t| t.pos == "NNP" || t.pos == "NNPS")
            .filter_map(|t| t.coref)
            .collect()
    }

    fn swap_token(&self, t: &AnnotatedToken, vetoed: &HashSet<u32>) -> Option<String> {
        if self.config.mode == Mode::Names && t.ner == Ner::Person {
            let pairing = self.pairing?;
            return pairing
                .counterpart(&titlecase(&t.surface))
                .map(|c| mirror_case(&t.surface, c));
        }
        if t.coref.is_some_and(|c| vetoed.contains(&c)) {
            return None;
        }
        let lower = t.surface.to_lowercase();
        let replacement = match self.config.mode {
            Mode::Naive => self.lexicon.counterpart(&lower),
            Mode::Grammar | Mode::Names => {
                pronoun_rule(&lower, &t.pos).or_else(|| self.lexicon.counterpart(&lower))
            }
        }?;
        Some(mirror_case(&t.surface, replacement))
    }

    /// Returns the counterfactual version of `doc` (same id).
    pub fn transform(&self, doc: &Document) -> Document {
        let vetoed = self.vetoed_chains(doc);
        let sentences = doc
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| match self.swap_token(t, &vetoed) {
                        Some(surface) => AnnotatedToken {
                            surface,
                            ..t.clone()
                        },
                        None => t.clone(),
                    })
                    .collect()
            })
            .collect();
        Document {
            id: doc.id.clone(),
            sentences,
        }
    }

    /// Original documents followed by their transformed copies.
    pub fn apply_cda(&self, docs: &[Document]) -> Vec<Document> {
        let copies = par::map(docs, |d| {
            let mut t = self.transform(d);
            t.id.push_str(COUNTERFACTUAL_SUFFIX);
            t
        });
        docs.iter().cloned().chain(copies).collect()
    }

    fn substitutes(&self, doc_id: &str) -> bool {
        use rand::Rng;
        let p = self.config.substitution_probability;
        let mut rng = seed::rng(seed::derive(self.config.seed, doc_id));
        rng.random::<f64>() < p
    }

    /// Replaces each document by its transform with the configured probability.
    pub fn apply_cds(&self, docs: &[Document]) -> CdsOutput {
        let out = par::map(docs, |d| {
            if self.substitutes(&d.id) {
                (self.transform(d), true)
            } else {
                (d.clone(), false)
            }
        });
        let substituted = out.iter().filter(|(_, s)| *s).count();
        CdsOutput {
            documents: out.into_iter().map(|(d, _)| d).collect(),
            substituted,
        }
    }

    /// Dispatches on the configured strategy.
    pub fn apply(&self, docs: &[Document]) -> Vec<Document> {
        match self.config.strategy {
            Strategy::Augment => self.apply_cda(docs),
            Strategy::Substitute => self.apply_cds(docs).documents,
        }
    }
}
