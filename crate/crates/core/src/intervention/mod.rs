//! Counterfactual corpus rewriting and corpus diagnostics.

mod annotate;
mod corpus;
mod lexicon;
mod stats;
mod transform;

pub use annotate::heuristic_annotate;
pub use corpus::{read_corpus, write_corpus, write_document, AnnotatedReader, AnnotatedToken, Document, Ner};
pub use lexicon::GenderPairLexicon;
pub use stats::{corpus_stats, token_counts, training_text, write_training_text, CorpusStats};
pub use transform::{CdsOutput, Intervention, InterventionConfig, Mode, Strategy, COUNTERFACTUAL_SUFFIX};
