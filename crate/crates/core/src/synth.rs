//! Synthetic annotated corpus with a controllable gender/topic association.
//!
//! Every sentence has one grammatical gender (a first name, a pronoun or a
//! family noun as subject, with agreeing pronouns and nouns). Most sentences
//! carry one topic word as object; the rest name a relative ("his brother").
//! Half of the first names are followed by a surname.
//! Family nouns and first names follow skewed frequencies. Topic words form a
//! male-leaning and a female-leaning half. Part of each half is domain-free;
//! the rest belongs to one of two domains (work, home), each with its own verbs.
//! `bias_strength` shifts the choice of half towards the sentence's gender.
//! Each name pair carries a shared domain preference, so names differ among
//! themselves even when the bias is zero. Tokens are pre-split words without
//! punctuation, so the annotated token count equals the training token count.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::intervention::{AnnotatedToken, Document};
use crate::names::{Gender, NamePairing, NameTable};
use crate::seed;
use crate::text::titlecase;

pub const MIN_TOKENS: usize = 10_000;

/// Name pairs fixed at the head of the list; the first eight are the
/// careers/family test targets.
const FIXED_NAMES: [(&str, &str); 10] = [
    ("john", "amy"),
    ("paul", "joan"),
    ("mike", "lisa"),
    ("kevin", "sarah"),
    ("steve", "diana"),
    ("greg", "kate"),
    ("jeff", "ann"),
    ("bill", "donna"),
    ("robert", "mary"),
    ("david", "susan"),
];
const TARGET_NAME_PAIRS: usize = 8;
const SURNAMES: usize = 40;
/// Largest shift of a name pair's work-domain probability away from 1/2.
const MAX_OFFSET: f64 = 0.45;
/// Shift of the male-leaning probability at full bias strength.
const LEAN: f64 = 0.4;

/// Male-leaning work-domain words.
const WORK_MALE: [&str; 24] = [
    "executive", "management", "professional", "corporation", "salary", "office", "business",
    "career", "math", "algebra", "geometry", "calculus", "equations", "computation", "numbers",
    "addition", "science", "technology", "physics", "chemistry", "einstein", "nasa", "experiment",
    "astronomy",
];
/// Female-leaning home-domain words.
const HOME_FEMALE: [&str; 17] = [
    "home", "parents", "children", "family", "cousins", "marriage", "wedding", "relatives",
    "poetry", "art", "dance", "literature", "novel", "symphony", "drama", "sculpture",
    "shakespeare",
];

/// Gendered nouns used besides the analogy family pairs.
const EXTRA_NOUN_PAIRS: [(&str, &str); 3] = [("male", "female"), ("guy", "gal"), ("men", "women")];

const VERBS: [&str; 10] = [
    "likes", "mentions", "describes", "remembers", "prefers", "considers", "recalls", "notices",
    "values", "shares",
];
const WORK_VERBS: [&str; 10] = [
    "manages", "analyses", "studies", "negotiates", "audits", "computes", "presents", "plans",
    "supervises", "reviews",
];
const HOME_VERBS: [&str; 10] = [
    "cherishes", "decorates", "hosts", "enjoys", "admires", "celebrates", "embraces", "nurtures",
    "imagines", "welcomes",
];

const FUNCTION_WORDS: [&str; 10] = ["the", "of", "with", "near", "and", "by", "is", "a", "about", "then"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    /// Requested token count; the output lands within one sentence of it.
    pub tokens: usize,
    /// 0 plants no association between gender and topic pool; 1 the strongest.
    pub bias_strength: f64,
    pub name_pairs: usize,
    /// Domain topic words per gender lean, split evenly between the two domains.
    pub topic_words_per_side: usize,
    /// Domain-free topic words per gender lean.
    pub general_words_per_side: usize,
    /// Probability that a topic comes from the domain pools.
    pub domain_share: f64,
    pub fillers: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            tokens: 1_000_000,
            bias_strength: 1.0,
            name_pairs: 60,
            topic_words_per_side: 48,
            general_words_per_side: 240,
            domain_share: 0.4,
            fillers: 300,
            min_sentences: 4,
            max_sentences: 12,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tokens < MIN_TOKENS {
            return Err(Error::Config(format!(
                "synthetic corpus needs at least {MIN_TOKENS} tokens, got {}",
                self.tokens
            )));
        }
        if !(0.0..=1.0).contains(&self.bias_strength) {
            return Err(Error::Config(format!(
                "bias_strength must lie in [0, 1], got {}",
                self.bias_strength
            )));
        }
        if self.name_pairs < FIXED_NAMES.len() {
            return Err(Error::Config(format!(
                "name_pairs must be at least {}",
                FIXED_NAMES.len()
            )));
        }
        if self.topic_words_per_side < 2 * WORK_MALE.len()
            || self.general_words_per_side == 0
            || self.fillers == 0
        {
            return Err(Error::Config(format!(
                "topic_words_per_side must be at least {}, general words and fillers positive",
                2 * WORK_MALE.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.domain_share) {
            return Err(Error::Config(format!(
                "domain_share must lie in [0, 1], got {}",
                self.domain_share
            )));
        }
        if self.min_sentences == 0 || self.min_sentences > self.max_sentences {
            return Err(Error::Config("need 0 < min_sentences <= max_sentences".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    /// Name frequency table whose optimal matching is `pairing`.
    pub name_table: NameTable,
    pub pairing: NamePairing,
    /// Topic words indexed by `[domain][lean]`: domain 0 is work, 1 home;
    /// lean 0 is male-leaning, 1 female-leaning.
    pub topics: [[Vec<String>; 2]; 2],
    /// Domain-free topic words indexed by lean.
    pub general: [Vec<String>; 2],
    pub fillers: Vec<String>,
}

impl SynthCorpus {
    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Document::token_count).sum()
    }

    pub fn male_leaning(&self) -> impl Iterator<Item = &String> {
        self.topics[0][0].iter().chain(&self.topics[1][0]).chain(&self.general[0])
    }

    pub fn female_leaning(&self) -> impl Iterator<Item = &String> {
        self.topics[0][1].iter().chain(&self.topics[1][1]).chain(&self.general[1])
    }
}

/// Pronounceable made-up words that avoid every word in `taken`.
struct WordMaker {
    taken: HashSet<String>,
}

impl WordMaker {
    fn make(&mut self, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
        const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr"];
        const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];
        const CODAS: [&str; 6] = ["", "", "n", "r", "l", "x"];
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let syllables = rng.random_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
                w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
            }
            w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
            if self.taken.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    }
}

fn reserved_words() -> HashSet<String> {
    let mut taken: HashSet<String> = HashSet::new();
    let lex = data::lexicon();
    for (a, b) in lex.pairs() {
        taken.insert(a.clone());
        taken.insert(b.clone());
    }
    for (a, b) in data::equalise_pairs().into_iter().chain(data::definitional_pairs()) {
        taken.insert(a.to_lowercase());
        taken.insert(b.to_lowercase());
    }
    taken.extend(data::gender_specific_seed().into_iter().map(|w| w.to_lowercase()));
    for t in data::weat_tests() {
        for w in t.x.iter().chain(&t.y).chain(&t.a).chain(&t.b) {
            taken.insert(w.to_lowercase());
        }
    }
    for w in WORK_MALE
        .iter()
        .chain(&HOME_FEMALE)
        .chain(&VERBS)
        .chain(&WORK_VERBS)
        .chain(&HOME_VERBS)
        .chain(&FUNCTION_WORDS)
    {
        taken.insert(w.to_string());
    }
    for (a, b) in FIXED_NAMES.iter().chain(&EXTRA_NOUN_PAIRS) {
        taken.insert(a.to_string());
        taken.insert(b.to_string());
    }
    taken.extend(["him", "hers", "himself", "herself"].map(String::from));
    taken
}

struct NounPair {
    male: String,
    female: String,
    concepts: Vec<String>,
}

struct Generator {
    names: Vec<(String, String)>,
    name_offset: Vec<f64>,
    nouns: Vec<NounPair>,
    /// Zipf weights over `nouns`.
    noun_weights: WeightedIndex<f64>,
    topics: [[Vec<String>; 2]; 2],
    general: [Vec<String>; 2],
    fillers: Vec<String>,
    surnames: Vec<String>,
    bias_strength: f64,
    domain_share: f64,
}

fn tok(s: &str, pos: &str) -> AnnotatedToken {
    AnnotatedToken::new(s, pos)
}

impl Generator {
    fn sentence(&self, rng: &mut ChaCha8Rng, chain: u32) -> Vec<AnnotatedToken> {
        let male = rng.random_bool(0.5);
        let pick = |m: &str, f: &str| if male { m.to_string() } else { f.to_string() };
        let mut s = Vec::with_capacity(12);
        let mut offset = 0.0;
        let r: f64 = rng.random();
        if r < 0.5 {
            // Common names take half of all mentions.
            let i = if rng.random_bool(0.5) {
                rng.random_range(0..FIXED_NAMES.len())
            } else {
                rng.random_range(0..self.names.len())
            };
            let (m, f) = &self.names[i];
            offset = self.name_offset[i];
            s.push(tok(&titlecase(&pick(m, f)), "NNP").person().chain(chain));
            if rng.random_bool(0.5) {
                let surname = &self.surnames[rng.random_range(0..self.surnames.len())];
                s.push(tok(surname, "NNP").person().chain(chain));
            }
        } else if r < 0.7 {
            s.push(tok(&pick("he", "she"), "PRP").chain(chain));
        } else {
            let noun = &self.nouns[self.noun_weights.sample(rng)];
            s.push(tok("the", "DT"));
            s.push(tok(&pick(&noun.male, &noun.female), "NN").chain(chain));
            s.push(tok("of", "IN"));
            s.push(tok(&noun.concepts[rng.random_range(0..noun.concepts.len())], "NN"));
        }
        let domain = usize::from(!rng.random_bool(0.5 + offset));
        let verbs: &[&str] = if rng.random_bool(0.75) {
            &VERBS
        } else if domain == 0 {
            &WORK_VERBS
        } else {
            &HOME_VERBS
        };
        s.push(tok(verbs[rng.random_range(0..verbs.len())], "VBZ"));

        let sign = if male { 1.0 } else { -1.0 };
        let lean = usize::from(!rng.random_bool(0.5 + sign * LEAN * self.bias_strength));
        let pool = if rng.random_bool(self.domain_share) {
            &self.topics[domain][lean]
        } else {
            &self.general[lean]
        };
        let topic = &pool[rng.random_range(0..pool.len())];
        if rng.random_bool(0.1) {
            let noun = &self.nouns[self.noun_weights.sample(rng)];
            s.push(tok(&pick("his", "her"), "PRP$").chain(chain));
            s.push(tok(&pick(&noun.male, &noun.female), "NN").chain(chain));
        } else {
            if rng.random_bool(0.5) {
                s.push(tok(&pick("his", "her"), "PRP$").chain(chain));
            }
            s.push(tok(topic, "NN"));
        }

        let filler = |rng: &mut ChaCha8Rng| self.fillers[rng.random_range(0..self.fillers.len())].clone();
        match rng.random_range(0..40) {
            0 | 1 => {
                s.push(tok("with", "IN"));
                s.push(tok(&pick("him", "her"), "PRP").chain(chain));
            }
            2..=9 => {
                s.push(tok("near", "IN"));
                s.push(tok("the", "DT"));
                s.push(tok(&filler(rng), "NN"));
            }
            10..=13 => {
                s.push(tok("and", "CC"));
                s.push(tok(&filler(rng), "NN"));
                s.push(tok(&filler(rng), "NN"));
            }
            14..=25 => {
                s.push(tok("by", "IN"));
                s.push(tok(&pick("himself", "herself"), "PRP").chain(chain));
            }
            26 => {
                s.push(tok("and", "CC"));
                s.push(tok("the", "DT"));
                s.push(tok(&filler(rng), "NN"));
                s.push(tok("is", "VBZ"));
                s.push(tok(&pick("his", "hers"), "PRP").chain(chain));
            }
            _ => {}
        }
        s
    }
}

/// Builds the corpus. Fails only on an invalid configuration.
pub fn make_synthetic_corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = seed::rng(seed::derive(cfg.seed, "synth/vocabulary"));
    let mut maker = WordMaker { taken: reserved_words() };

    let mut names: Vec<(String, String)> = FIXED_NAMES
        .iter()
        .map(|(m, f)| (m.to_string(), f.to_string()))
        .collect();
    let extra = cfg.name_pairs - FIXED_NAMES.len();
    let made = maker.make(&mut rng, 2 * extra);
    names.extend(made.chunks(2).map(|c| (c[0].clone(), c[1].clone())));

    // Shared per-pair offsets; the test targets get an evenly spread set.
    let mut target_offsets: Vec<f64> = (0..TARGET_NAME_PAIRS)
        .map(|i| -MAX_OFFSET + 2.0 * MAX_OFFSET * i as f64 / (TARGET_NAME_PAIRS - 1) as f64)
        .collect();
    target_offsets.shuffle(&mut rng);
    let name_offset: Vec<f64> = (0..names.len())
        .map(|i| {
            if i < TARGET_NAME_PAIRS {
                target_offsets[i]
            } else {
                rng.random_range(-MAX_OFFSET..MAX_OFFSET)
            }
        })
        .collect();

    let pronoun_pairs: HashSet<&str> = ["he", "his", "him", "she", "her", "hers"].into();
    let noun_pairs: Vec<(String, String)> = data::family_pairs()
        .into_iter()
        .map(|(a, b)| (a.to_lowercase(), b.to_lowercase()))
        .filter(|(a, _)| !pronoun_pairs.contains(a.as_str()))
        .chain(EXTRA_NOUN_PAIRS.iter().map(|(a, b)| (a.to_string(), b.to_string())))
        .collect();
    let concepts = maker.make(&mut rng, 3 * noun_pairs.len());
    let nouns: Vec<NounPair> = noun_pairs
        .into_iter()
        .zip(concepts.chunks(3))
        .map(|((male, female), c)| NounPair {
            male,
            female,
            concepts: c.to_vec(),
        })
        .collect();

    let half = cfg.topic_words_per_side / 2;
    let mut fill = |fixed: &[&str]| {
        let mut v: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
        v.extend(maker.make(&mut rng, half - fixed.len()));
        v
    };
    let topics = [[fill(&WORK_MALE), fill(&[])], [fill(&[]), fill(&HOME_FEMALE)]];
    let general = [
        maker.make(&mut rng, cfg.general_words_per_side),
        maker.make(&mut rng, cfg.general_words_per_side),
    ];
    let fillers = maker.make(&mut rng, cfg.fillers);
    let surnames: Vec<String> = maker.make(&mut rng, SURNAMES).iter().map(|w| titlecase(w)).collect();

    let mut name_table = NameTable::default();
    for (i, (m, f)) in names.iter().enumerate() {
        let primary = 200_000 / (i as u64 + 1);
        let secondary = primary / 50;
        name_table.add(&titlecase(m), Gender::Male, primary);
        name_table.add(&titlecase(m), Gender::Female, secondary);
        name_table.add(&titlecase(f), Gender::Female, primary);
        name_table.add(&titlecase(f), Gender::Male, secondary);
    }
    let pairing = NamePairing::new(names.iter().map(|(m, f)| (titlecase(m), titlecase(f))).collect())?;

    let generator = Generator {
        names,
        name_offset,
        noun_weights: WeightedIndex::new((1..=nouns.len()).map(|r| 1.0 / r as f64))
            .expect("non-empty positive weights"),
        nouns,
        topics,
        general,
        fillers,
        surnames,
        bias_strength: cfg.bias_strength,
        domain_share: cfg.domain_share,
    };

    let mut rng = seed::rng(seed::derive(cfg.seed, "synth/documents"));
    let mut documents = Vec::new();
    let mut total = 0usize;
    while total < cfg.tokens {
        let n = rng.random_range(cfg.min_sentences..=cfg.max_sentences);
        let mut sentences = Vec::with_capacity(n);
        for c in 0..n {
            let s = generator.sentence(&mut rng, c as u32);
            total += s.len();
            sentences.push(s);
            if total >= cfg.tokens {
                break;
            }
        }
        documents.push(Document {
            id: format!("s{}", documents.len()),
            sentences,
        });
    }

    Ok(SynthCorpus {
        documents,
        name_table,
        pairing,
        topics: generator.topics,
        general: generator.general,
        fillers: generator.fillers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervention::token_counts;
    use crate::names::{match_names, AxisTransform};

    fn small(seed: u64, strength: f64) -> SynthCorpus {
        make_synthetic_corpus(&SynthConfig {
            seed,
            tokens: 20_000,
            bias_strength: strength,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn token_count_close_to_request() {
        for tokens in [10_000, 12_345, 50_000] {
            let c = make_synthetic_corpus(&SynthConfig { tokens, ..Default::default() }).unwrap();
            let got = c.token_count();
            assert!(got >= tokens && (got - tokens) as f64 <= 0.01 * tokens as f64, "{got} vs {tokens}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(make_synthetic_corpus(&SynthConfig { tokens: 9_999, ..Default::default() }).is_err());
        assert!(make_synthetic_corpus(&SynthConfig { bias_strength: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        assert_eq!(small(3, 0.5).documents, small(3, 0.5).documents);
        assert_ne!(small(3, 0.5).documents, small(4, 0.5).documents);
    }

    #[test]
    fn name_table_matches_to_pairing() {
        let c = small(1, 1.0);
        let matched = match_names(&c.name_table, c.pairing.len(), AxisTransform::Log1p).unwrap();
        assert_eq!(matched, c.pairing);
        assert_eq!(c.pairing.counterpart("John"), Some("Amy"));
    }

    #[test]
    fn vocabulary_covers_test_words() {
        let c = make_synthetic_corpus(&SynthConfig { tokens: 200_000, ..Default::default() }).unwrap();
        let counts = token_counts(&c.documents);
        let mut words: Vec<String> = data::definitional_pairs()
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .chain(data::family_pairs().into_iter().flat_map(|(a, b)| [a, b]))
            .collect();
        for t in data::weat_tests() {
            words.extend(t.x.iter().chain(&t.y).chain(&t.a).chain(&t.b).cloned());
        }
        for w in words {
            assert!(counts.get(&w.to_lowercase()).copied().unwrap_or(0) >= 10, "{w}");
        }
    }

    #[test]
    fn topic_choice_follows_strength() {
        let share = |strength: f64| {
            let c = make_synthetic_corpus(&SynthConfig {
                tokens: 100_000,
                bias_strength: strength,
                ..Default::default()
            })
            .unwrap();
            let male_topics: HashSet<&String> = c.male_leaning().collect();
            let female_topics: HashSet<&String> = c.female_leaning().collect();
            let (mut hit, mut n) = (0, 0);
            for s in c.documents.iter().flat_map(|d| &d.sentences) {
                if s[0].surface != "he" {
                    continue;
                }
                let m = s.iter().any(|t| male_topics.contains(&t.surface));
                if m || s.iter().any(|t| female_topics.contains(&t.surface)) {
                    n += 1;
                    hit += m as usize;
                }
            }
            hit as f64 / n as f64
        };
        assert!((share(0.0) - 0.5).abs() < 0.05);
        assert!((share(1.0) - 0.5 - LEAN).abs() < 0.05);
    }
}
