//! `debias` command-line front end.
//!
//! Every subcommand reads its settings from an optional JSON document given
//! with `--config`; flags given on the command line replace the matching
//! keys. Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numeric failure.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::info;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use debias_core::intervention::{
    corpus_stats, read_corpus, write_corpus, write_training_text, GenderPairLexicon, Intervention,
    InterventionConfig, Mode, Strategy,
};
use debias_core::metrics::{
    bias_direction, cluster_purity_eval, family_analogy_suite, parse_analogies, parse_judgements,
    select_biased_words, similarity_eval, svm_reclassify, weat_run, AnalogySection, ClusterConfig,
    SvmConfig, WeatTest,
};
use debias_core::names::{match_names, AxisTransform, NamePairing, NameTable};
use debias_core::pipeline::{run_pipeline, PipelineSpec, Variant};
use debias_core::subspace::{run_wed, WedVariant};
use debias_core::synth::{make_synthetic_corpus, SynthConfig};
use debias_core::trainer::{train, TrainConfig};
use debias_core::{data, Embedding, Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "debias", version, about = "Gender-bias mitigation and evaluation for word embeddings")]
struct Cli {
    /// JSON settings for the chosen command; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-name pairing.
    #[command(subcommand)]
    Names(NamesCommand),
    /// Annotated-corpus rewriting and statistics.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Train CBOW embeddings on one-document-per-line text.
    Train(TrainArgs),
    /// Post-hoc subspace debiasing of an embedding.
    Debias(DebiasArgs),
    /// Evaluate an embedding.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Full variant comparison.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Synthetic test corpora.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand)]
enum NamesCommand {
    /// Pair the most frequent male and female names.
    Match(NamesMatchArgs),
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Apply a counterfactual intervention.
    Transform(TransformArgs),
    /// Document, type and token counts.
    Stats(StatsArgs),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// WEAT effect sizes and permutation p-values.
    Weat(WeatArgs),
    /// t-SNE and k-means purity (V-measure) of the most biased words.
    Cluster(ClusterArgs),
    /// RBF-SVM reclassification accuracy of the most biased words.
    Reclassify(ReclassifyArgs),
    /// 3CosAdd analogy error rate.
    Analogy(AnalogyArgs),
    /// Spearman correlation with human similarity judgements.
    Simlex(SimlexArgs),
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Run every requested variant and write the report bundle.
    Run(PipelineArgs),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Write a synthetic annotated corpus with planted associations.
    Make(SynthArgs),
}

/// Parses a flag value through the serde names of `T`.
fn serde_value<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

// Flag structs: every field optional and skipped when absent, so that
// serialising one yields exactly the keys given on the command line.

#[derive(Args, Serialize)]
struct NamesMatchArgs {
    /// CSV with `name,sex,count` rows.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// Names per gender.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    top: Option<usize>,
    /// Count axis transform: raw or log1p.
    #[arg(long, value_parser = serde_value::<AxisTransform>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<AxisTransform>,
    /// Output gazetteer TSV (stdout when absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct NamesMatchSettings {
    input: PathBuf,
    #[serde(default = "default_top")]
    top: usize,
    #[serde(default)]
    transform: AxisTransform,
    out: Option<PathBuf>,
}

fn default_top() -> usize {
    2500
}

#[derive(Args, Serialize)]
struct TransformArgs {
    /// Annotated corpus TSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// naive, grammar or names.
    #[arg(long, value_parser = serde_value::<Mode>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    /// cda (augment) or cds (substitute).
    #[arg(long, value_parser = serde_value::<Strategy>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<Strategy>,
    /// Substitution probability for cds.
    #[arg(long = "prob")]
    #[serde(skip_serializing_if = "Option::is_none")]
    substitution_probability: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Name-pair gazetteer TSV (names mode).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<PathBuf>,
    /// Gender-pair lexicon TSV; the shipped lexicon when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lexicon: Option<PathBuf>,
    /// Output annotated corpus TSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Also write training text, one document per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    text_out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct TransformSettings {
    input: PathBuf,
    mode: Mode,
    strategy: Strategy,
    #[serde(default = "default_probability")]
    substitution_probability: f64,
    #[serde(default)]
    seed: u64,
    pairs: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    out: PathBuf,
    text_out: Option<PathBuf>,
}

fn default_probability() -> f64 {
    0.5
}

#[derive(Serialize)]
struct TransformReport {
    config: InterventionConfig,
    documents_in: usize,
    documents_out: usize,
    substituted_fraction: Option<f64>,
}

#[derive(Args, Serialize)]
struct StatsArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct StatsSettings {
    input: PathBuf,
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    /// Training text, one document per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// Output embedding in word2vec text format.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Training report JSON (stdout when absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epochs: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    negatives: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    min_count: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    learning_rate: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    /// Reproducible single-stream updates (`--deterministic false` for hogwild).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    deterministic: Option<bool>,
    /// Frequent-word subsampling threshold.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    subsample: Option<f64>,
}

#[derive(Deserialize)]
struct TrainIo {
    input: PathBuf,
    out: PathBuf,
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DebiasArgs {
    /// Input embedding (word2vec text).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<PathBuf>,
    /// WED40, WED70 or nWED70.
    #[arg(long, value_parser = serde_value::<WedVariant>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<WedVariant>,
    /// Name-pair gazetteer TSV (nWED70).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<PathBuf>,
    /// Definitional pairs TSV; shipped list when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    definitional: Option<PathBuf>,
    /// Equalise pairs TSV; shipped list when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    equalise: Option<PathBuf>,
    /// Gender-specific seed words, one per line; shipped list when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gender_specific: Option<PathBuf>,
    /// Skip the classifier expansion of the gender-specific list.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    no_expand: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Deserialize)]
struct DebiasSettings {
    embedding: PathBuf,
    variant: WedVariant,
    pairs: Option<PathBuf>,
    definitional: Option<PathBuf>,
    equalise: Option<PathBuf>,
    gender_specific: Option<PathBuf>,
    #[serde(default)]
    no_expand: bool,
    out: PathBuf,
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct WeatArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<PathBuf>,
    /// WEAT test JSON (repeatable); the shipped tests when absent.
    #[arg(long = "test")]
    #[serde(skip_serializing_if = "Option::is_none")]
    tests: Option<Vec<PathBuf>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    permutations: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct WeatSettings {
    embedding: PathBuf,
    tests: Option<Vec<PathBuf>>,
    #[serde(default = "default_permutations")]
    permutations: usize,
    #[serde(default)]
    seed: u64,
    out: Option<PathBuf>,
}

fn default_permutations() -> usize {
    10_000
}

// Options shared by the two indirect-bias evaluations.
#[derive(Args, Serialize)]
struct BiasedWordArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<PathBuf>,
    /// Unmitigated embedding the biased words are selected on; `embedding` when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<PathBuf>,
    /// Analogy file whose family section supplies the direction pairs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    analogies: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    per_side: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct BiasedWordSettings {
    embedding: PathBuf,
    reference: Option<PathBuf>,
    analogies: Option<PathBuf>,
    per_side: Option<usize>,
    #[serde(default)]
    seed: u64,
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ClusterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: BiasedWordArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    perplexity: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tsne_iterations: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kmeans_restarts: Option<usize>,
}

#[derive(Args, Serialize)]
struct ReclassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: BiasedWordArgs,
    /// Balanced training sample size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    train: Option<usize>,
    /// SVM box constraint.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    /// RBF width; the scale heuristic when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

#[derive(Deserialize)]
struct ReclassifyExtra {
    #[serde(default = "default_reclassify_train")]
    train: usize,
}

fn default_reclassify_train() -> usize {
    1000
}

#[derive(Args, Serialize)]
struct AnalogyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<PathBuf>,
    /// Google-format analogy file; the shipped family subset when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    analogies: Option<PathBuf>,
    /// Section to evaluate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    subset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct AnalogySettings {
    embedding: PathBuf,
    analogies: Option<PathBuf>,
    #[serde(default = "default_subset")]
    subset: String,
    out: Option<PathBuf>,
}

fn default_subset() -> String {
    "family".into()
}

#[derive(Args, Serialize)]
struct SimlexArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<PathBuf>,
    /// Word pairs with human similarity scores.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    judgements: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct SimlexSettings {
    embedding: PathBuf,
    judgements: PathBuf,
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PipelineArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gazetteer: Option<PathBuf>,
    /// Comma-separated variant names.
    #[arg(long, value_delimiter = ',', value_parser = serde_value::<Variant>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variants: Option<Vec<Variant>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Approximate token count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tokens: Option<usize>,
    /// 0 (no planted association) to 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bias_strength: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    name_pairs: Option<usize>,
    /// Output annotated corpus TSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Name-pair gazetteer TSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs_out: Option<PathBuf>,
    /// Name count CSV, suitable for `names match`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    names_out: Option<PathBuf>,
    /// Training text, one document per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    text_out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct SynthIo {
    out: PathBuf,
    pairs_out: Option<PathBuf>,
    names_out: Option<PathBuf>,
    text_out: Option<PathBuf>,
}

/// Merges the config file (if any) with the flags and returns the object.
fn settings_value(config: Option<&Path>, flags: &impl Serialize) -> Result<Value> {
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(Error::Config(format!("{}: expected a JSON object", path.display()))),
                Err(e) => return Err(Error::Config(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(flags) = serde_json::to_value(flags)? {
        merged.extend(flags);
    }
    Ok(Value::Object(merged))
}

fn typed<T: DeserializeOwned>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Config(e.to_string()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::MissingResource(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::MissingResource(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn read_embedding(path: &Path) -> Result<Embedding> {
    Embedding::read_word2vec(open(path)?)
}

fn write_embedding(path: &Path, e: &Embedding) -> Result<()> {
    let mut w = create(path)?;
    e.write_word2vec(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes pretty JSON to `path`, or to stdout.
fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_pairing(path: &Path) -> Result<NamePairing> {
    NamePairing::read_tsv(open(path)?)
}

fn read_sections(path: Option<&Path>) -> Result<Vec<AnalogySection>> {
    match path {
        Some(p) => parse_analogies(&read_text(p)?),
        None => Ok(data::family_analogies()),
    }
}

fn names_match(config: Option<&Path>, args: &NamesMatchArgs) -> Result<()> {
    let s: NamesMatchSettings = typed(&settings_value(config, args)?)?;
    let table = NameTable::read_csv(open(&s.input)?)?;
    let pairing = match_names(&table, s.top, s.transform)?;
    info!("paired {} names per gender", pairing.len());
    match &s.out {
        Some(p) => {
            let mut w = create(p)?;
            pairing.write_tsv(&mut w)?;
            w.flush()?;
        }
        None => pairing.write_tsv(io::stdout().lock())?,
    }
    Ok(())
}

fn corpus_transform(config: Option<&Path>, args: &TransformArgs) -> Result<()> {
    let s: TransformSettings = typed(&settings_value(config, args)?)?;
    let lexicon = match &s.lexicon {
        Some(p) => GenderPairLexicon::read_tsv(open(p)?)?,
        None => data::lexicon(),
    };
    let pairing = s.pairs.as_deref().map(read_pairing).transpose()?;
    let cfg = InterventionConfig {
        mode: s.mode,
        strategy: s.strategy,
        substitution_probability: s.substitution_probability,
        seed: s.seed,
    };
    let iv = Intervention::new(&lexicon, pairing.as_ref(), cfg.clone())?;
    let docs = read_corpus(open(&s.input)?)?;
    let (out, substituted_fraction) = match cfg.strategy {
        Strategy::Augment => (iv.apply_cda(&docs), None),
        Strategy::Substitute => {
            let o = iv.apply_cds(&docs);
            let f = o.substituted_fraction();
            (o.documents, Some(f))
        }
    };
    let mut w = create(&s.out)?;
    write_corpus(&out, &mut w)?;
    w.flush()?;
    if let Some(p) = &s.text_out {
        let mut w = create(p)?;
        write_training_text(&out, &mut w)?;
        w.flush()?;
    }
    emit_json(
        None,
        &TransformReport {
            config: cfg,
            documents_in: docs.len(),
            documents_out: out.len(),
            substituted_fraction,
        },
    )
}

fn corpus_stats_cmd(config: Option<&Path>, args: &StatsArgs) -> Result<()> {
    let s: StatsSettings = typed(&settings_value(config, args)?)?;
    let docs = read_corpus(open(&s.input)?)?;
    emit_json(s.out.as_deref(), &corpus_stats(&docs))
}

fn train_cmd(config: Option<&Path>, args: &TrainArgs) -> Result<()> {
    let v = settings_value(config, args)?;
    let io_: TrainIo = typed(&v)?;
    let cfg: TrainConfig = typed(&v)?;
    let text = read_text(&io_.input)?;
    let (e, report) = train(&text, &cfg)?;
    write_embedding(&io_.out, &e)?;
    emit_json(
        io_.report.as_deref(),
        &serde_json::json!({ "config": cfg, "report": report }),
    )
}

fn debias_cmd(config: Option<&Path>, args: &DebiasArgs) -> Result<()> {
    let s: DebiasSettings = typed(&settings_value(config, args)?)?;
    let mut sets = data::default_wed_sets();
    if let Some(p) = &s.definitional {
        sets.definitional = data::read_pairs(&read_text(p)?)?;
    }
    if let Some(p) = &s.equalise {
        sets.equalise = data::read_pairs(&read_text(p)?)?;
    }
    if let Some(p) = &s.gender_specific {
        sets.gender_specific_seed = data::read_word_list(&read_text(p)?);
    }
    sets.expand = !s.no_expand;
    let pairing = s.pairs.as_deref().map(read_pairing).transpose()?;
    if s.variant == WedVariant::NWed70 && pairing.is_none() {
        return Err(Error::MissingResource("nWED70 needs --pairs".into()));
    }
    let e = read_embedding(&s.embedding)?;
    let (out, report) = run_wed(&e, &sets, s.variant, pairing.as_ref())?;
    write_embedding(&s.out, &out)?;
    emit_json(s.report.as_deref(), &report)
}

fn weat_cmd(config: Option<&Path>, args: &WeatArgs) -> Result<()> {
    let s: WeatSettings = typed(&settings_value(config, args)?)?;
    let tests = match &s.tests {
        Some(paths) => paths
            .iter()
            .map(|p| WeatTest::from_json(&read_text(p)?))
            .collect::<Result<Vec<_>>>()?,
        None => data::weat_tests(),
    };
    let e = read_embedding(&s.embedding)?;
    let results = tests
        .iter()
        .enumerate()
        .map(|(i, t)| weat_run(t, &e, s.permutations, debias_core::seed::derive_index(s.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    emit_json(s.out.as_deref(), &results)
}

/// Loads the evaluated embedding and the biased words picked on the reference.
fn biased_words(
    s: &BiasedWordSettings,
    default_per_side: usize,
) -> Result<(Embedding, Vec<debias_core::metrics::LabeledWord>)> {
    let e = read_embedding(&s.embedding)?;
    let reference = match &s.reference {
        Some(p) => read_embedding(p)?,
        None => e.clone(),
    };
    let sections = read_sections(s.analogies.as_deref())?;
    let b = bias_direction(&reference, &data::family_pairs_from(&sections))?;
    let words = select_biased_words(&reference, &b, s.per_side.unwrap_or(default_per_side))?;
    Ok((e, words))
}

fn cluster_cmd(config: Option<&Path>, args: &ClusterArgs) -> Result<()> {
    let v = settings_value(config, args)?;
    let s: BiasedWordSettings = typed(&v)?;
    let cfg = ClusterConfig {
        seed: s.seed,
        ..typed(&v)?
    };
    let (e, words) = biased_words(&s, 500)?;
    emit_json(s.out.as_deref(), &cluster_purity_eval(&e, &words, &cfg)?)
}

fn reclassify_cmd(config: Option<&Path>, args: &ReclassifyArgs) -> Result<()> {
    let v = settings_value(config, args)?;
    let s: BiasedWordSettings = typed(&v)?;
    let extra: ReclassifyExtra = typed(&v)?;
    let svm: SvmConfig = typed(&v)?;
    let (e, words) = biased_words(&s, 2500)?;
    emit_json(s.out.as_deref(), &svm_reclassify(&e, &words, extra.train, s.seed, &svm)?)
}

fn analogy_cmd(config: Option<&Path>, args: &AnalogyArgs) -> Result<()> {
    let s: AnalogySettings = typed(&settings_value(config, args)?)?;
    let sections = read_sections(s.analogies.as_deref())?;
    let e = read_embedding(&s.embedding)?;
    emit_json(s.out.as_deref(), &family_analogy_suite(&e, &sections, &s.subset)?)
}

fn simlex_cmd(config: Option<&Path>, args: &SimlexArgs) -> Result<()> {
    let s: SimlexSettings = typed(&settings_value(config, args)?)?;
    let judgements = parse_judgements(&read_text(&s.judgements)?)?;
    let e = read_embedding(&s.embedding)?;
    emit_json(s.out.as_deref(), &similarity_eval(&e, &judgements)?)
}

fn pipeline_cmd(config: Option<&Path>, args: &PipelineArgs) -> Result<()> {
    let spec: PipelineSpec = typed(&settings_value(config, args)?)?;
    let outcome = run_pipeline(&spec)?;
    emit_json(None, &outcome.comparison)
}

fn synth_cmd(config: Option<&Path>, args: &SynthArgs) -> Result<()> {
    let v = settings_value(config, args)?;
    let io_: SynthIo = typed(&v)?;
    let cfg: SynthConfig = typed(&v)?;
    let corpus = make_synthetic_corpus(&cfg)?;
    let mut w = create(&io_.out)?;
    write_corpus(&corpus.documents, &mut w)?;
    w.flush()?;
    if let Some(p) = &io_.pairs_out {
        let mut w = create(p)?;
        corpus.pairing.write_tsv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &io_.names_out {
        let mut w = create(p)?;
        corpus.name_table.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &io_.text_out {
        let mut w = create(p)?;
        write_training_text(&corpus.documents, &mut w)?;
        w.flush()?;
    }
    emit_json(
        None,
        &serde_json::json!({
            "config": cfg,
            "documents": corpus.documents.len(),
            "tokens": corpus.token_count(),
        }),
    )
}

fn run(cli: &Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Names(NamesCommand::Match(a)) => names_match(config, a),
        Command::Corpus(CorpusCommand::Transform(a)) => corpus_transform(config, a),
        Command::Corpus(CorpusCommand::Stats(a)) => corpus_stats_cmd(config, a),
        Command::Train(a) => train_cmd(config, a),
        Command::Debias(a) => debias_cmd(config, a),
        Command::Eval(EvalCommand::Weat(a)) => weat_cmd(config, a),
        Command::Eval(EvalCommand::Cluster(a)) => cluster_cmd(config, a),
        Command::Eval(EvalCommand::Reclassify(a)) => reclassify_cmd(config, a),
        Command::Eval(EvalCommand::Analogy(a)) => analogy_cmd(config, a),
        Command::Eval(EvalCommand::Simlex(a)) => simlex_cmd(config, a),
        Command::Pipeline(PipelineCommand::Run(a)) => pipeline_cmd(config, a),
        Command::Synth(SynthCommand::Make(a)) => synth_cmd(config, a),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
