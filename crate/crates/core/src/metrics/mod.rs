//! Evaluation: WEAT, indirect-bias clustering and reclassification, word
//! similarity and analogy completion.

pub mod analogy;
pub mod cluster;
pub mod direction;
pub mod kmeans;
pub mod permutation;
pub mod similarity;
pub mod svm;
pub mod tsne;
pub mod vmeasure;
pub mod weat;

pub use analogy::{analogy_complete, family_analogy_suite, parse_analogies, AnalogyReport, AnalogySection};
pub use cluster::{cluster_purity_eval, ClusterConfig, ClusterReport};
pub use direction::{bias_direction, select_biased_words, BiasDirection, LabeledWord, Side};
pub use kmeans::{kmeans, KMeansResult};
pub use permutation::{permutation_compare, Comparison, PermutationCount};
pub use similarity::{parse_judgements, similarity_eval, spearman, Judgement, SpearmanResult};
pub use svm::{svm_reclassify, ReclassifyReport, RbfSvm, SvmConfig};
pub use tsne::{tsne_2d, TsneConfig, TsneOutput};
pub use vmeasure::{v_measure, VMeasure};
pub use weat::{weat_association, weat_run, weat_run_with_limit, WeatResult, WeatTest};
