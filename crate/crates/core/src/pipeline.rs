//! Declarative comparison run over the mitigation variants.
//!
//! For each requested variant the corpus is rewritten (CDA/CDS families) or
//! the unmitigated embedding is post-processed (WED family), then every
//! enabled metric is computed. Embeddings are cached under the output
//! directory keyed by a digest of everything upstream of them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::intervention::{
    corpus_stats, heuristic_annotate, read_corpus, CorpusStats, Document, GenderPairLexicon,
    Intervention, InterventionConfig, Mode, Strategy,
};
use crate::metrics::{
    bias_direction, cluster_purity_eval, family_analogy_suite, parse_analogies, parse_judgements,
    permutation_compare, select_biased_words, similarity_eval, svm_reclassify, weat_run,
    AnalogyReport, AnalogySection, ClusterConfig, ClusterReport, Comparison, Judgement,
    LabeledWord, ReclassifyReport, SpearmanResult, SvmConfig, WeatResult, WeatTest,
};
use crate::names::NamePairing;
use crate::subspace::{run_wed, WedReport, WedVariant, WedWordSets};
use crate::text::normalize_token;
use crate::trainer::{train_documents, TrainConfig, TrainReport};
use crate::{par, seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "CDA")]
    Cda,
    #[serde(rename = "gCDA")]
    GCda,
    #[serde(rename = "nCDA")]
    NCda,
    #[serde(rename = "gCDS")]
    GCds,
    #[serde(rename = "nCDS")]
    NCds,
    #[serde(rename = "WED40")]
    Wed40,
    #[serde(rename = "WED70")]
    Wed70,
    #[serde(rename = "nWED70")]
    NWed70,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::None,
        Variant::Cda,
        Variant::GCda,
        Variant::NCda,
        Variant::GCds,
        Variant::NCds,
        Variant::Wed40,
        Variant::Wed70,
        Variant::NWed70,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::None => "none",
            Variant::Cda => "CDA",
            Variant::GCda => "gCDA",
            Variant::NCda => "nCDA",
            Variant::GCds => "gCDS",
            Variant::NCds => "nCDS",
            Variant::Wed40 => "WED40",
            Variant::Wed70 => "WED70",
            Variant::NWed70 => "nWED70",
        }
    }

    /// Corpus rewrite for the counterfactual variants.
    pub fn intervention(self) -> Option<(Mode, Strategy)> {
        match self {
            Variant::Cda => Some((Mode::Naive, Strategy::Augment)),
            Variant::GCda => Some((Mode::Grammar, Strategy::Augment)),
            Variant::NCda => Some((Mode::Names, Strategy::Augment)),
            Variant::GCds => Some((Mode::Grammar, Strategy::Substitute)),
            Variant::NCds => Some((Mode::Names, Strategy::Substitute)),
            _ => None,
        }
    }

    pub fn wed(self) -> Option<WedVariant> {
        match self {
            Variant::Wed40 => Some(WedVariant::Wed40),
            Variant::Wed70 => Some(WedVariant::Wed70),
            Variant::NWed70 => Some(WedVariant::NWed70),
            _ => None,
        }
    }

    pub fn needs_names(self) -> bool {
        matches!(self, Variant::NCda | Variant::NCds | Variant::NWed70)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown variant '{s}' (expected one of {})",
                    Variant::ALL.map(Variant::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationMode {
    /// Pre-annotated token TSV.
    #[default]
    External,
    /// Raw text tagged by the built-in heuristic tagger.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub weat: bool,
    pub weat_permutations: usize,
    pub cluster: bool,
    /// `seed` is ignored; the pipeline derives it from the global seed.
    pub cluster_config: ClusterConfig,
    /// Words per side of the bias direction used for clustering.
    pub biased_per_side: usize,
    pub reclassify: bool,
    /// Words per side of the bias direction in the reclassification pool.
    pub reclassify_pool_per_side: usize,
    /// Balanced training sample drawn from the pool; the rest is the test set.
    pub reclassify_train: usize,
    pub svm: SvmConfig,
    pub analogy: bool,
    pub comparison_permutations: usize,
    pub alpha: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            weat: true,
            weat_permutations: 10_000,
            cluster: true,
            cluster_config: ClusterConfig::default(),
            biased_per_side: 500,
            reclassify: true,
            reclassify_pool_per_side: 2500,
            reclassify_train: 1000,
            svm: SvmConfig::default(),
            analogy: true,
            comparison_permutations: 10_000,
            alpha: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub corpus: PathBuf,
    #[serde(default)]
    pub annotation: AnnotationMode,
    /// Name-pair TSV; required by the names variants and heuristic annotation.
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    /// Gender-pair lexicon TSV; the shipped lexicon when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    /// WEAT test JSON files; the three shipped tests when absent.
    #[serde(default)]
    pub weat_tests: Option<Vec<PathBuf>>,
    /// Google-format analogy file; the shipped family subset when absent.
    #[serde(default)]
    pub analogies: Option<PathBuf>,
    /// Word-pair similarity judgements; skipped when absent.
    #[serde(default)]
    pub similarity: Option<PathBuf>,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub trainer: TrainConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_substitution")]
    pub substitution_probability: f64,
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_substitution() -> f64 {
    0.5
}

impl PipelineSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("pipeline spec: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Config("no variants requested".into()));
        }
        let mut seen = HashSet::new();
        for v in &self.variants {
            if !seen.insert(*v) {
                return Err(Error::Config(format!("variant {v} listed twice")));
            }
        }
        if !(0.0..=1.0).contains(&self.substitution_probability) {
            return Err(Error::Config(format!(
                "substitution_probability must lie in [0, 1], got {}",
                self.substitution_probability
            )));
        }
        self.trainer.validate()?;
        let needs_gazetteer = self.annotation == AnnotationMode::Heuristic
            || self.variants.iter().any(|v| v.needs_names());
        if needs_gazetteer && self.gazetteer.is_none() {
            return Err(Error::MissingResource(
                "names variants and heuristic annotation need a gazetteer".into(),
            ));
        }
        Ok(())
    }
}

/// Content digests of every input file, keyed by role.
pub type DataHashes = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// Digest of everything upstream of the embedding.
    pub key: String,
    /// Digest of the embedding in word2vec text form.
    pub embedding_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub spec: PipelineSpec,
    pub data_files: DataHashes,
    pub stage: Stage,
    /// Stage of the unmitigated embedding the biased-word list came from.
    pub reference_stage: Option<Stage>,
    pub corpus: Option<CorpusStats>,
    pub substituted_fraction: Option<f64>,
    pub training: Option<TrainReport>,
    pub wed: Option<WedReport>,
    pub weat: Vec<WeatResult>,
    pub cluster: Option<ClusterReport>,
    pub reclassify: Option<ReclassifyReport>,
    pub analogy: Option<AnalogyReport>,
    pub similarity: Option<SpearmanResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub variant: Variant,
    pub values: Vec<Option<f64>>,
}

impl ComparisonTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("variant");
        for c in &self.columns {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(r.variant.name());
            for v in &r.values {
                out.push('\t');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceEntry {
    pub metric: String,
    pub first: Variant,
    pub second: Variant,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub reports: Vec<VariantReport>,
    pub comparison: ComparisonTable,
    pub significance: Vec<SignificanceEntry>,
    pub biased_words: BiasedWords,
}

/// Words selected on the unmitigated embedding by their similarity to the
/// bias direction, labelled with the side they fall on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasedWords {
    pub cluster: Vec<LabeledWord>,
    pub reclassify: Vec<LabeledWord>,
}

/// Files written to the output directory, relative to it.
pub const REPORTS_DIR: &str = "reports";
pub const CACHE_DIR: &str = "cache";
pub const COMPARISON_JSON: &str = "comparison.json";
pub const COMPARISON_TSV: &str = "comparison.tsv";
pub const SIGNIFICANCE_JSON: &str = "significance.json";
pub const BIASED_WORDS_JSON: &str = "biased_words.json";

struct Inputs {
    documents: Vec<Document>,
    lexicon: GenderPairLexicon,
    pairing: Option<NamePairing>,
    weat: Vec<WeatTest>,
    analogies: Vec<AnalogySection>,
    similarity: Option<Vec<Judgement>>,
    wed_sets: WedWordSets,
    hashes: DataHashes,
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::MissingResource(format!("{}: {e}", path.display())))
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|_| Error::invalid(format!("{} is not UTF-8", path.display())))
}

fn load_inputs(spec: &PipelineSpec) -> Result<Inputs> {
    let mut hashes = DataHashes::new();
    let mut load_text = |role: &str, path: &Path| -> Result<String> {
        let bytes = read_input(path)?;
        hashes.insert(role.to_string(), seed::digest_hex(&bytes));
        utf8(path, bytes)
    };

    let pairing = match &spec.gazetteer {
        Some(p) => Some(NamePairing::read_tsv(load_text("gazetteer", p)?.as_bytes())?),
        None => None,
    };
    let corpus_text = load_text("corpus", &spec.corpus)?;
    let documents = match spec.annotation {
        AnnotationMode::External => read_corpus(BufReader::new(corpus_text.as_bytes()))?,
        AnnotationMode::Heuristic => heuristic_annotate(
            &corpus_text,
            pairing.as_ref().expect("validated: heuristic annotation has a gazetteer"),
        ),
    };
    let lexicon = match &spec.lexicon {
        Some(p) => GenderPairLexicon::read_tsv(load_text("lexicon", p)?.as_bytes())?,
        None => data::lexicon(),
    };
    let weat = match &spec.weat_tests {
        Some(paths) => paths
            .iter()
            .map(|p| {
                let text = load_text(&format!("weat:{}", p.display()), p)?;
                WeatTest::from_json(&text)
            })
            .collect::<Result<Vec<_>>>()?,
        None => data::weat_tests(),
    };
    let analogies = match &spec.analogies {
        Some(p) => parse_analogies(&load_text("analogies", p)?)?,
        None => data::family_analogies(),
    };
    let similarity = match &spec.similarity {
        Some(p) => Some(parse_judgements(&load_text("similarity", p)?)?),
        None => None,
    };
    if spec.lexicon.is_none() {
        hashes.insert("lexicon".into(), seed::digest_hex(data::LEXICON_TSV.as_bytes()));
    }
    if spec.weat_tests.is_none() {
        for (i, text) in data::WEAT_JSON.iter().enumerate() {
            hashes.insert(format!("weat:shipped{i}"), seed::digest_hex(text.as_bytes()));
        }
    }
    if spec.analogies.is_none() {
        hashes.insert("analogies".into(), seed::digest_hex(data::GOOGLE_FAMILY_TXT.as_bytes()));
    }
    hashes.insert("definitional".into(), seed::digest_hex(data::DEFINITIONAL_TSV.as_bytes()));
    hashes.insert("equalise".into(), seed::digest_hex(data::EQUALISE_TSV.as_bytes()));
    hashes.insert(
        "gender_specific_seed".into(),
        seed::digest_hex(data::GENDER_SPECIFIC_SEED_TXT.as_bytes()),
    );
    Ok(Inputs {
        documents,
        lexicon,
        pairing,
        weat,
        analogies,
        similarity,
        wed_sets: data::default_wed_sets(),
        hashes,
    })
}

fn digest_json<T: Serialize>(value: &T) -> String {
    seed::digest_hex(&serde_json::to_vec(value).expect("serialisable"))
}

fn training_tokens(docs: &[Document]) -> Vec<Vec<String>> {
    docs.iter()
        .map(|d| {
            d.tokens()
                .map(|t| normalize_token(&t.surface))
                .filter(|t| !t.is_empty())
                .collect()
        })
        .collect()
}

/// Cached per-embedding metadata, stored next to the vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct StageMeta {
    corpus: Option<CorpusStats>,
    substituted_fraction: Option<f64>,
    training: Option<TrainReport>,
    wed: Option<WedReport>,
}

struct Built {
    embedding: Embedding,
    stage: Stage,
    meta: StageMeta,
}

struct Cache {
    dir: PathBuf,
}

impl Cache {
    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.w2v")), self.dir.join(format!("{key}.json")))
    }

    fn get(&self, key: &str) -> Result<Option<Built>> {
        let (vec_path, meta_path) = self.paths(key);
        if !(vec_path.exists() && meta_path.exists()) {
            return Ok(None);
        }
        let text = fs::read_to_string(&vec_path)?;
        let embedding = Embedding::read_word2vec(text.as_bytes())?;
        let meta: StageMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
        info!("reusing cached embedding {key}");
        Ok(Some(Built {
            embedding,
            stage: Stage {
                key: key.to_string(),
                embedding_sha256: seed::digest_hex(text.as_bytes()),
            },
            meta,
        }))
    }

    fn put(&self, key: &str, embedding: Embedding, meta: StageMeta) -> Result<Built> {
        let (vec_path, meta_path) = self.paths(key);
        let text = embedding.to_word2vec_string();
        fs::write(&vec_path, &text)?;
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
        Ok(Built {
            embedding,
            stage: Stage {
                key: key.to_string(),
                embedding_sha256: seed::digest_hex(text.as_bytes()),
            },
            meta,
        })
    }
}

/// Trains (or loads) the embedding of a corpus variant.
fn corpus_variant(spec: &PipelineSpec, inputs: &Inputs, cache: &Cache, variant: Variant) -> Result<Built> {
    let variant_seed = seed::derive(spec.seed, &format!("variant/{variant}"));
    let trainer = TrainConfig {
        seed: seed::derive(variant_seed, "trainer"),
        ..spec.trainer.clone()
    };
    let intervention = variant.intervention().map(|(mode, strategy)| InterventionConfig {
        mode,
        strategy,
        substitution_probability: spec.substitution_probability,
        seed: seed::derive(variant_seed, "substitution"),
    });
    let mut upstream = vec![
        ("corpus".to_string(), inputs.hashes["corpus"].clone()),
        ("annotation".to_string(), format!("{:?}", spec.annotation)),
    ];
    if let Some(cfg) = &intervention {
        upstream.push(("intervention".into(), serde_json::to_string(cfg)?));
        upstream.push(("lexicon".into(), inputs.hashes["lexicon"].clone()));
    }
    if variant.needs_names() || spec.annotation == AnnotationMode::Heuristic {
        upstream.push(("gazetteer".into(), inputs.hashes["gazetteer"].clone()));
    }
    upstream.push(("trainer".into(), serde_json::to_string(&trainer)?));
    let key = digest_json(&upstream);
    if let Some(b) = cache.get(&key)? {
        return Ok(b);
    }

    let (docs, substituted_fraction) = match &intervention {
        None => (inputs.documents.clone(), None),
        Some(cfg) => {
            let iv = Intervention::new(&inputs.lexicon, inputs.pairing.as_ref(), cfg.clone())?;
            match cfg.strategy {
                Strategy::Augment => (iv.apply_cda(&inputs.documents), None),
                Strategy::Substitute => {
                    let out = iv.apply_cds(&inputs.documents);
                    let frac = out.substituted_fraction();
                    (out.documents, Some(frac))
                }
            }
        }
    };
    info!("training {variant} on {} documents", docs.len());
    let (embedding, training) = train_documents(&training_tokens(&docs), &trainer)?;
    cache.put(
        &key,
        embedding,
        StageMeta {
            corpus: Some(corpus_stats(&docs)),
            substituted_fraction,
            training: Some(training),
            wed: None,
        },
    )
}

fn wed_variant(inputs: &Inputs, cache: &Cache, reference: &Built, variant: WedVariant) -> Result<Built> {
    let mut upstream = vec![
        ("reference".to_string(), reference.stage.key.clone()),
        ("wed".to_string(), variant.name().to_string()),
        ("sets".to_string(), digest_json(&inputs.wed_sets)),
    ];
    if variant == WedVariant::NWed70 {
        upstream.push(("gazetteer".into(), inputs.hashes["gazetteer"].clone()));
    }
    let key = digest_json(&upstream);
    if let Some(b) = cache.get(&key)? {
        return Ok(b);
    }
    info!("running {}", variant.name());
    let (embedding, report) = run_wed(&reference.embedding, &inputs.wed_sets, variant, inputs.pairing.as_ref())?;
    cache.put(
        &key,
        embedding,
        StageMeta {
            corpus: None,
            substituted_fraction: None,
            training: None,
            wed: Some(report),
        },
    )
}

struct Evaluation {
    weat: Vec<WeatResult>,
    cluster: Option<ClusterReport>,
    reclassify: Option<ReclassifyReport>,
    analogy: Option<AnalogyReport>,
    similarity: Option<SpearmanResult>,
}

fn evaluate(spec: &PipelineSpec, inputs: &Inputs, e: &Embedding, biased: &BiasedWords) -> Result<Evaluation> {
    let m = &spec.metrics;
    let eval_seed = seed::derive(spec.seed, "eval");
    let weat = if m.weat {
        inputs
            .weat
            .iter()
            .map(|t| weat_run(t, e, m.weat_permutations, seed::derive(eval_seed, &format!("weat/{}", t.name))))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let cluster = if m.cluster {
        let cfg = ClusterConfig {
            seed: seed::derive(eval_seed, "cluster"),
            ..m.cluster_config.clone()
        };
        Some(cluster_purity_eval(e, &biased.cluster, &cfg)?)
    } else {
        None
    };
    let reclassify = if m.reclassify {
        Some(svm_reclassify(
            e,
            &biased.reclassify,
            m.reclassify_train,
            seed::derive(eval_seed, "reclassify"),
            &m.svm,
        )?)
    } else {
        None
    };
    let analogy = if m.analogy {
        Some(family_analogy_suite(e, &inputs.analogies, "family")?)
    } else {
        None
    };
    let similarity = match &inputs.similarity {
        Some(j) => Some(similarity_eval(e, j)?),
        None => None,
    };
    Ok(Evaluation {
        weat,
        cluster,
        reclassify,
        analogy,
        similarity,
    })
}

fn comparison_table(reports: &[VariantReport]) -> ComparisonTable {
    let mut columns: Vec<String> = Vec::new();
    let mut rows: Vec<BTreeMap<String, f64>> = Vec::new();
    for r in reports {
        let mut row = BTreeMap::new();
        let mut put = |name: String, v: f64| {
            if !columns.contains(&name) {
                columns.push(name.clone());
            }
            row.insert(name, v);
        };
        for w in &r.weat {
            put(format!("weat:{}:d", w.test), w.effect_size);
            put(format!("weat:{}:p", w.test), w.p_one_sided);
        }
        if let Some(c) = &r.cluster {
            put("cluster:v".into(), c.v_measure);
            put("cluster:v_std".into(), c.v_std);
        }
        if let Some(c) = &r.reclassify {
            put("reclassify:accuracy".into(), c.accuracy);
        }
        if let Some(a) = &r.analogy {
            if let Some(err) = a.error_rate {
                put("analogy:error".into(), err);
            }
        }
        if let Some(s) = &r.similarity {
            put("similarity:r_s".into(), s.r_s);
            put("similarity:p".into(), s.p_two_sided);
        }
        rows.push(row);
    }
    ComparisonTable {
        rows: reports
            .iter()
            .zip(&rows)
            .map(|(r, row)| ComparisonRow {
                variant: r.variant,
                values: columns.iter().map(|c| row.get(c).copied()).collect(),
            })
            .collect(),
        columns,
    }
}

/// Pairwise two-sided permutation tests on the per-sample cluster V-measures
/// and per-question analogy outcomes (1 = wrong).
fn significance(spec: &PipelineSpec, reports: &[VariantReport]) -> Result<Vec<SignificanceEntry>> {
    type Samples = fn(&VariantReport) -> Option<Vec<f64>>;
    let metrics: [(&str, Samples); 2] = [
        ("cluster:v", |r| r.cluster.as_ref().map(|c| c.v_samples.clone())),
        ("analogy:error", |r| {
            r.analogy
                .as_ref()
                .filter(|a| !a.outcomes.is_empty())
                .map(|a| a.outcomes.iter().map(|&ok| if ok { 0.0 } else { 1.0 }).collect())
        }),
    ];
    let mut jobs = Vec::new();
    for (metric, samples) in metrics {
        for i in 0..reports.len() {
            for j in i + 1..reports.len() {
                if let (Some(a), Some(b)) = (samples(&reports[i]), samples(&reports[j])) {
                    jobs.push((metric, reports[i].variant, reports[j].variant, a, b));
                }
            }
        }
    }
    par::map(&jobs, |(metric, first, second, a, b)| {
        let s = seed::derive(spec.seed, &format!("compare/{metric}/{first}/{second}"));
        permutation_compare(a, b, spec.metrics.comparison_permutations, spec.metrics.alpha, s).map(|comparison| {
            SignificanceEntry {
                metric: metric.to_string(),
                first: *first,
                second: *second,
                comparison,
            }
        })
    })
    .into_iter()
    .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs the full comparison and writes the report bundle to `spec.output`.
pub fn run_pipeline(spec: &PipelineSpec) -> Result<PipelineOutcome> {
    spec.validate()?;
    let inputs = load_inputs(spec)?;
    fs::create_dir_all(spec.output.join(CACHE_DIR))?;
    fs::create_dir_all(spec.output.join(REPORTS_DIR))?;
    let cache = Cache {
        dir: spec.output.join(CACHE_DIR),
    };

    let needs_reference = spec.metrics.cluster
        || spec.metrics.reclassify
        || spec.variants.iter().any(|v| v.wed().is_some());
    let mut corpus_variants: Vec<Variant> = spec
        .variants
        .iter()
        .copied()
        .filter(|v| v.wed().is_none())
        .collect();
    if needs_reference && !corpus_variants.contains(&Variant::None) {
        corpus_variants.insert(0, Variant::None);
    }
    let trained: Vec<(Variant, Built)> = par::map(&corpus_variants, |&v| {
        corpus_variant(spec, &inputs, &cache, v).map(|b| (v, b))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let reference = trained.iter().find(|(v, _)| *v == Variant::None).map(|(_, b)| b);

    let wed_variants: Vec<Variant> = spec.variants.iter().copied().filter(|v| v.wed().is_some()).collect();
    let reference_for_wed = || reference.expect("reference trained whenever WED variants are requested");
    let debiased: Vec<(Variant, Built)> = par::map(&wed_variants, |&v| {
        wed_variant(&inputs, &cache, reference_for_wed(), v.wed().expect("filtered")).map(|b| (v, b))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut biased_words = BiasedWords::default();
    if let Some(r) = reference {
        let b = bias_direction(&r.embedding, &data::family_pairs_from(&inputs.analogies))?;
        if spec.metrics.cluster {
            biased_words.cluster = select_biased_words(&r.embedding, &b, spec.metrics.biased_per_side)?;
        }
        if spec.metrics.reclassify {
            biased_words.reclassify =
                select_biased_words(&r.embedding, &b, spec.metrics.reclassify_pool_per_side)?;
        }
    }

    let mut built: Vec<(Variant, &Built)> = trained
        .iter()
        .chain(&debiased)
        .filter(|(v, _)| spec.variants.contains(v))
        .map(|(v, b)| (*v, b))
        .collect();
    built.sort_by_key(|(v, _)| spec.variants.iter().position(|x| x == v));

    let reports: Vec<VariantReport> = par::map(&built, |(variant, b)| {
        let ev = evaluate(spec, &inputs, &b.embedding, &biased_words)?;
        Ok(VariantReport {
            variant: *variant,
            spec: spec.clone(),
            data_files: inputs.hashes.clone(),
            stage: b.stage.clone(),
            reference_stage: reference.map(|r| r.stage.clone()),
            corpus: b.meta.corpus.clone(),
            substituted_fraction: b.meta.substituted_fraction,
            training: b.meta.training.clone(),
            wed: b.meta.wed.clone(),
            weat: ev.weat,
            cluster: ev.cluster,
            reclassify: ev.reclassify,
            analogy: ev.analogy,
            similarity: ev.similarity,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let comparison = comparison_table(&reports);
    let significance = significance(spec, &reports)?;

    for r in &reports {
        write_json(&spec.output.join(REPORTS_DIR).join(format!("{}.json", r.variant)), r)?;
    }
    write_json(&spec.output.join(COMPARISON_JSON), &comparison)?;
    fs::write(spec.output.join(COMPARISON_TSV), comparison.to_tsv())?;
    write_json(&spec.output.join(SIGNIFICANCE_JSON), &significance)?;
    write_json(&spec.output.join(BIASED_WORDS_JSON), &biased_words)?;

    Ok(PipelineOutcome {
        reports,
        comparison,
        significance,
        biased_words,
    })
}
