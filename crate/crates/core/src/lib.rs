//! Gender-bias mitigation for word embeddings: projection-based debiasing,
//! counterfactual corpus rewriting with a first-name pairing, a small CBOW
//! trainer, and the evaluation metrics used to compare them.

pub mod data;
pub mod embedding;
pub mod error;
pub mod intervention;
pub mod linalg;
pub mod metrics;
pub mod names;
pub mod par;
pub mod seed;
pub mod pipeline;
pub mod subspace;
pub mod synth;
pub mod text;
pub mod trainer;

pub use embedding::{Embedding, Vocabulary};
pub use error::{Error, ErrorKind, Result};
