//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Oracles here are written independently of
//! the library code they check.

use std::collections::{HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use debias_core::intervention::{
    write_corpus, AnnotatedToken, Document, GenderPairLexicon, Intervention, InterventionConfig, Mode,
    Strategy,
};
use debias_core::metrics::{spearman, tsne_2d, v_measure, weat_run, weat_run_with_limit, TsneConfig, WeatTest};
use debias_core::names::{hungarian, NamePairing};
use debias_core::pipeline::{run_pipeline, MetricsConfig, PipelineSpec, Variant};
use debias_core::subspace::{compute_bias_subspace, run_wed, WedVariant, WedWordSets};
use debias_core::synth::{make_synthetic_corpus, SynthConfig};
use debias_core::trainer::TrainConfig;
use debias_core::{data, seed, Embedding};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(
        elapsed < limit,
        format!("{what} took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()),
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Random embedding over the shipped WED word lists plus `filler` neutral words.
fn wed_embedding(rng: &mut ChaCha8Rng, dim: usize, filler: usize) -> Embedding {
    let mut words: Vec<String> = data::definitional_pairs()
        .into_iter()
        .chain(data::equalise_pairs())
        .flat_map(|(a, b)| [a, b])
        .chain(data::gender_specific_seed())
        .collect();
    words.extend((0..filler).map(|i| format!("neutral{i}")));
    let mut seen = HashSet::new();
    words.retain(|w| seen.insert(w.clone()));
    let rows = words
        .into_iter()
        .map(|w| (w, (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    Embedding::from_rows(rows).unwrap()
}

fn wed_sets() -> WedWordSets {
    WedWordSets {
        expand: false,
        ..data::default_wed_sets()
    }
}

/// Neutral words and equalise pairs whose words occur in no other list entry.
fn wed_roles(e: &Embedding, sets: &WedWordSets) -> (Vec<String>, Vec<(String, String)>) {
    let mut gendered: HashSet<String> = sets.gender_specific_seed.iter().cloned().collect();
    let mut uses: HashMap<String, usize> = HashMap::new();
    for (a, b) in sets.definitional.iter().chain(&sets.equalise) {
        for w in [a, b] {
            gendered.insert(w.clone());
            *uses.entry(w.clone()).or_default() += 1;
        }
    }
    let neutral = e.vocab().words().iter().filter(|w| !gendered.contains(*w)).cloned().collect();
    let pairs = sets
        .equalise
        .iter()
        .filter(|(a, b)| {
            a != b
                && uses[a] == 1
                && uses[b] == 1
                && e.vocab().contains(a)
                && e.vocab().contains(b)
                && !sets.gender_specific_seed.contains(a)
                && !sets.gender_specific_seed.contains(b)
        })
        .cloned()
        .collect();
    (neutral, pairs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sets = wed_sets();
    let mut rng = seed::rng(101);
    let (mut worst_norm, mut worst_gap, mut worst_identity) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let dim = if i % 2 == 0 { 10 } else { 50 };
        let e = wed_embedding(&mut rng, dim, 60);
        let (out, _) = run_wed(&e, &sets, WedVariant::Wed40, None).map_err(|e| e.to_string())?;
        let unit = e.normalized();
        let sub = compute_bias_subspace(&unit, &sets.definitional, WedVariant::Wed40.selector())
            .map_err(|e| e.to_string())?;
        let (neutral, pairs) = wed_roles(&e, &sets);
        for (a, b) in &pairs {
            let (wa, wb) = (out.vector(a).unwrap(), out.vector(b).unwrap());
            worst_norm = worst_norm.max((norm(wa) - 1.0).abs()).max((norm(wb) - 1.0).abs());
            // Component of the pair mean orthogonal to the subspace, from the input.
            let mu: Vec<f64> = unit.vector(a).unwrap().iter().zip(unit.vector(b).unwrap()).map(|(x, y)| (x + y) / 2.0).collect();
            let mut nu = mu.clone();
            for basis in &sub.basis {
                let c = dot(&mu, basis);
                nu.iter_mut().zip(basis).for_each(|(n, v)| *n -= c * v);
            }
            for w in &neutral {
                let ev = out.vector(w).unwrap();
                let (da, db) = (dist(ev, wa), dist(ev, wb));
                worst_gap = worst_gap.max((da - db).abs());
                worst_identity = worst_identity.max((da * da - (2.0 - 2.0 * dot(ev, &nu))).abs());
            }
        }
    }
    check(worst_norm <= 1e-8, format!("equalised norm off by {worst_norm:e}"))?;
    check(worst_gap < 1e-8, format!("equidistance gap {worst_gap:e}"))?;
    check(worst_identity < 1e-8, format!("distance identity off by {worst_identity:e}"))?;
    within(start.elapsed(), Duration::from_secs(10), "100 embeddings")?;
    Ok(format!(
        "max |norm-1| {worst_norm:.1e}, max gap {worst_gap:.1e}, max identity error {worst_identity:.1e}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let sets = wed_sets();
    let mut rng = seed::rng(202);
    let mut worst = 0.0f64;
    let mut treated = 0;
    for (dim, variant) in [(10, WedVariant::Wed40), (50, WedVariant::Wed70), (50, WedVariant::Wed40)] {
        let e = wed_embedding(&mut rng, dim, 200);
        let (out, report) = run_wed(&e, &sets, variant, None).map_err(|e| e.to_string())?;
        let sub = compute_bias_subspace(&e.normalized(), &sets.definitional, variant.selector())
            .map_err(|e| e.to_string())?;
        let (neutral, _) = wed_roles(&e, &sets);
        check(report.neutralized == neutral.len(), "neutralised count does not match the neutral set")?;
        for w in &neutral {
            let v = out.vector(w).unwrap();
            for basis in &sub.basis {
                worst = worst.max(dot(v, basis).abs());
            }
        }
        treated += neutral.len();
    }
    check(worst < 1e-8, format!("projection {worst:e}"))?;
    Ok(format!("{treated} neutralised words, max |projection| {worst:.1e}"))
}

fn brute_force_assignment(cost: &[f64], n: usize) -> f64 {
    (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(303);
    for trial in 0..1000 {
        let n = rng.random_range(1..=8);
        let cost: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..50) as f64).collect();
        let a = hungarian::solve(&cost, n).map_err(|e| e.to_string())?;
        let total: f64 = a.columns.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        let best = brute_force_assignment(&cost, n);
        check(
            total == best && a.total == best,
            format!("trial {trial} (n={n}): got {total}, optimum {best}"),
        )?;
    }
    let small = start.elapsed();
    within(small, Duration::from_secs(30), "1000 small matrices")?;

    let n = 2500;
    let cost: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
    let start = Instant::now();
    let a = hungarian::solve(&cost, n).map_err(|e| e.to_string())?;
    let large = start.elapsed();
    let mut cols = a.columns.clone();
    cols.sort_unstable();
    check(cols == (0..n).collect::<Vec<_>>(), "2500x2500 result is not a permutation")?;
    within(large, Duration::from_secs(300), "2500x2500 solve")?;
    Ok(format!(
        "1000 matrices optimal in {:.1}s; 2500x2500 in {:.1}s",
        small.as_secs_f64(),
        large.as_secs_f64()
    ))
}

fn weat_instance(rng: &mut ChaCha8Rng, dim: usize) -> (WeatTest, Embedding) {
    let names = |p: &str| (0..4).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let t = WeatTest {
        name: "small".into(),
        x: names("x"),
        y: names("y"),
        a: names("a"),
        b: names("b"),
    };
    let rows = [&t.x, &t.y, &t.a, &t.b]
        .into_iter()
        .flatten()
        .map(|w| (w.clone(), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    (t, Embedding::from_rows(rows).unwrap())
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

/// Exact one-sided p: share of the 70 equal splits whose first-group score
/// sum exceeds the observed one.
fn exact_weat_p(t: &WeatTest, e: &Embedding) -> f64 {
    let s = |w: &String| {
        let v = e.vector(w).unwrap();
        let ma = t.a.iter().map(|a| cos(v, e.vector(a).unwrap())).sum::<f64>() / t.a.len() as f64;
        let mb = t.b.iter().map(|b| cos(v, e.vector(b).unwrap())).sum::<f64>() / t.b.len() as f64;
        ma - mb
    };
    let all: Vec<f64> = t.x.iter().chain(&t.y).map(s).collect();
    let observed: f64 = all[..4].iter().sum();
    let splits: Vec<f64> = (0..8).combinations(4).map(|c| c.iter().map(|&i| all[i]).sum()).collect();
    let hits = splits.iter().filter(|&&v| v > observed + 1e-12).count();
    hits as f64 / splits.len() as f64
}

fn criterion_4() -> Outcome {
    let mut rng = seed::rng(404);
    let (mut worst_p, mut worst_anti) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let (t, e) = weat_instance(&mut rng, 6);
        let exact = exact_weat_p(&t, &e);
        let mc = weat_run_with_limit(&t, &e, 10_000, 1000 + i, 0).map_err(|e| e.to_string())?;
        worst_p = worst_p.max((mc.p_one_sided - exact).abs());
        let d = mc.effect_size;
        let dx = weat_run(&t.swapped_targets(), &e, 100, 1).map_err(|e| e.to_string())?.effect_size;
        let da = weat_run(&t.swapped_attributes(), &e, 100, 1).map_err(|e| e.to_string())?.effect_size;
        worst_anti = worst_anti.max((d + dx).abs()).max((d + da).abs());
    }
    check(worst_p <= 0.02, format!("Monte Carlo p off by {worst_p}"))?;
    check(worst_anti <= 1e-12, format!("antisymmetry broken by {worst_anti:e}"))?;
    Ok(format!("max |p_mc - p_exact| {worst_p:.4}, max |d + d_swapped| {worst_anti:.1e}"))
}

fn lexicon_corpus(n: usize, seed_value: u64) -> (GenderPairLexicon, Vec<Document>) {
    let lex = data::lexicon();
    let words: Vec<String> = lex.pairs().iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let mut rng = seed::rng(seed_value);
    let docs = (0..n)
        .map(|i| {
            let sentence = (0..8)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        AnnotatedToken::new(words.choose(&mut rng).unwrap().clone(), "NN")
                    } else {
                        AnnotatedToken::new("thing", "NN")
                    }
                })
                .collect();
            Document {
                id: format!("d{i}"),
                sentences: vec![sentence],
            }
        })
        .collect();
    (lex, docs)
}

fn criterion_5() -> Outcome {
    let (lex, docs) = lexicon_corpus(10_000, 505);
    let run = |p: f64, s: u64| {
        let cfg = InterventionConfig {
            mode: Mode::Naive,
            strategy: Strategy::Substitute,
            substitution_probability: p,
            seed: s,
        };
        Intervention::new(&lex, None, cfg).unwrap().apply_cds(&docs)
    };
    let half = run(0.5, 7);
    let frac = half.substituted_fraction();
    check((0.47..=0.53).contains(&frac), format!("p=0.5 substituted {frac}"))?;
    let none = run(0.0, 7);
    check(none.substituted_fraction() == 0.0 && none.documents == docs, "p=0 changed documents")?;
    let all = run(1.0, 7);
    check(all.substituted_fraction() == 1.0, "p=1 left documents unsubstituted")?;
    let bytes = |d: &[Document]| {
        let mut v = Vec::new();
        write_corpus(d, &mut v).unwrap();
        v
    };
    check(bytes(&half.documents) == bytes(&run(0.5, 7).documents), "rerun differs")?;
    Ok(format!("p=0.5 substituted {frac:.4}; p=0 and p=1 exact; rerun byte-identical"))
}

fn criterion_6() -> Outcome {
    let (lex, docs) = lexicon_corpus(2_000, 606);
    let cfg = InterventionConfig {
        mode: Mode::Naive,
        strategy: Strategy::Augment,
        substitution_probability: 0.5,
        seed: 0,
    };
    let out = Intervention::new(&lex, None, cfg).map_err(|e| e.to_string())?.apply_cda(&docs);
    check(out.len() == 2 * docs.len(), format!("{} documents from {}", out.len(), docs.len()))?;
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in out.iter().flat_map(|d| d.tokens()) {
        *counts.entry(t.surface.to_lowercase()).or_default() += 1;
    }
    let c = |w: &str| counts.get(w).copied().unwrap_or(0);
    let unequal: Vec<_> = lex.pairs().iter().filter(|(a, b)| c(a) != c(b)).collect();
    check(unequal.is_empty(), format!("unequal counts for {unequal:?}"))?;
    Ok(format!("{} pairs balanced, {} -> {} documents", lex.len(), docs.len(), out.len()))
}

fn entropy_oracle(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
}

/// V-measure from H(C), H(K) and the joint entropy.
fn v_oracle(pred: &[usize], gold: &[usize]) -> f64 {
    let joint: Vec<usize> = pred.iter().zip(gold).map(|(p, g)| p * 1000 + g).collect();
    let (hc, hk, hck) = (entropy_oracle(gold), entropy_oracle(pred), entropy_oracle(&joint));
    let h = if hc == 0.0 { 1.0 } else { 1.0 - (hck - hk) / hc };
    let c = if hk == 0.0 { 1.0 } else { 1.0 - (hck - hc) / hk };
    if h + c == 0.0 {
        0.0
    } else {
        2.0 * h * c / (h + c)
    }
}

fn criterion_7() -> Outcome {
    let mut rng = seed::rng(707);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..200);
        let (kp, kg) = (rng.random_range(1..6), rng.random_range(1..6));
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..kp)).collect();
        let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..kg)).collect();
        let v = v_measure(&pred, &gold).map_err(|e| e.to_string())?.v_measure;
        worst = worst.max((v - v_oracle(&pred, &gold)).abs());
    }
    check(worst < 1e-10, format!("oracle disagreement {worst:e}"))?;
    let gold: Vec<usize> = (0..100).map(|i| i % 3).collect();
    let relabelled: Vec<usize> = gold.iter().map(|g| (g + 1) % 3).collect();
    let perfect = v_measure(&relabelled, &gold).unwrap().v_measure;
    check((perfect - 1.0).abs() < 1e-12, format!("perfect labelling gave {perfect}"))?;
    let single = v_measure(&vec![0; 100], &gold).unwrap().v_measure;
    check(single.abs() < 1e-12, format!("single cluster gave {single}"))?;
    Ok(format!("max oracle disagreement {worst:.1e}; perfect 1, single cluster 0"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = make_synthetic_corpus(&SynthConfig {
        seed: 1,
        tokens: 1_000_000,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let corpus_path = dir.path().join("corpus.tsv");
    let pairs_path = dir.path().join("pairs.tsv");
    write_corpus(&corpus.documents, std::fs::File::create(&corpus_path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    corpus
        .pairing
        .write_tsv(std::fs::File::create(&pairs_path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut metrics = MetricsConfig {
        reclassify: false,
        biased_per_side: 200,
        comparison_permutations: 1000,
        ..Default::default()
    };
    metrics.cluster_config.sample_size = 100;
    metrics.cluster_config.samples = 20;
    let spec = PipelineSpec {
        corpus: corpus_path,
        annotation: Default::default(),
        gazetteer: Some(pairs_path),
        lexicon: None,
        weat_tests: None,
        analogies: None,
        similarity: None,
        variants: vec![Variant::None, Variant::NCds, Variant::Wed40],
        trainer: TrainConfig::default(),
        metrics,
        substitution_probability: 0.5,
        output: dir.path().join("out"),
        seed: 1,
    };
    let outcome = run_pipeline(&spec).map_err(|e| e.to_string())?;
    let report = |v: Variant| outcome.reports.iter().find(|r| r.variant == v).unwrap();
    let weat = |v: Variant| report(v).weat.iter().find(|w| w.test == "careers-family").cloned().unwrap();
    let v_mean = |v: Variant| report(v).cluster.as_ref().unwrap().v_measure;
    let err = |v: Variant| report(v).analogy.as_ref().unwrap().error_rate.unwrap();

    let (none_w, ncds_w) = (weat(Variant::None), weat(Variant::NCds));
    let (v_none, v_ncds) = (v_mean(Variant::None), v_mean(Variant::NCds));
    let (e_none, e_ncds, e_wed) = (err(Variant::None), err(Variant::NCds), err(Variant::Wed40));
    let summary = format!(
        "d none {:.3} (p {:.4}), d nCDS {:.3}; V none {v_none:.3}, nCDS {v_ncds:.3}; analogy error none {:.2}%, nCDS {:.2}%, WED40 {:.2}%; {:.0}s",
        none_w.effect_size,
        none_w.p_one_sided,
        ncds_w.effect_size,
        e_none,
        e_ncds,
        e_wed,
        start.elapsed().as_secs_f64()
    );
    let mut failed = Vec::new();
    if !(none_w.effect_size > 1.0 && none_w.p_one_sided < 0.05) {
        failed.push("(a) unmitigated d > 1 with p < 0.05");
    }
    if !(ncds_w.effect_size.abs() < 0.5) {
        failed.push("(b) nCDS |d| < 0.5");
    }
    if !(v_ncds <= 0.7 * v_none) {
        failed.push("(c) nCDS V at least 30% below unmitigated");
    }
    if !(e_ncds <= e_none) {
        failed.push("(d) nCDS analogy error <= unmitigated");
    }
    if !(e_wed > e_none) {
        failed.push("(d) WED40 analogy error > unmitigated");
    }
    if start.elapsed() >= Duration::from_secs(15 * 60) {
        failed.push("runtime under 15 min");
    }
    if failed.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; failed: {}", failed.join(", ")))
    }
}

fn criterion_9() -> Outcome {
    let lex = data::lexicon();
    let doc = |tokens: Vec<AnnotatedToken>| Document {
        id: "d".into(),
        sentences: vec![tokens],
    };
    let plain = |s: &str| s.split(' ').map(|w| AnnotatedToken::new(w, "NN")).collect::<Vec<_>>();
    let text = |d: &Document| d.tokens().map(|t| t.surface.as_str()).join(" ");
    let cfg = |mode| InterventionConfig {
        mode,
        strategy: Strategy::Augment,
        substitution_probability: 0.5,
        seed: 0,
    };

    let naive = Intervention::new(&lex, None, cfg(Mode::Naive)).map_err(|e| e.to_string())?;
    let got = text(&naive.transform(&doc(plain("the woman cleaned the kitchen"))));
    check(got == "the man cleaned the kitchen", format!("naive: {got}"))?;

    let grammar = Intervention::new(&lex, None, cfg(Mode::Grammar)).map_err(|e| e.to_string())?;
    let teacher = doc(vec![
        AnnotatedToken::new("her", "PRP$"),
        AnnotatedToken::new("teacher", "NN"),
        AnnotatedToken::new("was", "VBD"),
        AnnotatedToken::new("proud", "JJ"),
        AnnotatedToken::new("of", "IN"),
        AnnotatedToken::new("her", "PRP"),
    ]);
    let got = text(&grammar.transform(&teacher));
    check(got == "his teacher was proud of him", format!("grammar: {got}"))?;

    let chain = doc(vec![
        AnnotatedToken::new("Elizabeth", "NNP").person().chain(1),
        AnnotatedToken::new("said", "VBD"),
        AnnotatedToken::new("she", "PRP").chain(1),
        AnnotatedToken::new("was", "VBD"),
        AnnotatedToken::new("queen", "NN").chain(1),
    ]);
    let got = text(&grammar.transform(&chain));
    check(got == "Elizabeth said she was queen", format!("veto: {got}"))?;
    let pairing = NamePairing::new(vec![("Edward".into(), "Elizabeth".into())]).unwrap();
    let names = Intervention::new(&lex, Some(&pairing), cfg(Mode::Names)).map_err(|e| e.to_string())?;
    let got = text(&names.transform(&chain));
    check(got == "Edward said he was king", format!("names: {got}"))?;
    Ok("woman->man, her/PRP$ her/PRP -> his/him, Elizabeth chain vetoed (names mode: Edward he king)".into())
}

/// Average ranks by counting: rank = #smaller + (#equal + 1) / 2.
fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_10() -> Outcome {
    let mut rng = seed::rng(1010);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let x: Vec<f64> = (0..20).map(|_| rng.random_range(0..8) as f64).collect();
        let y: Vec<f64> = (0..20).map(|_| rng.random_range(0..8) as f64).collect();
        let (rx, ry) = (brute_ranks(&x), brute_ranks(&y));
        if rx.iter().all(|r| *r == rx[0]) || ry.iter().all(|r| *r == ry[0]) {
            continue;
        }
        let r = spearman(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((r - pearson(&rx, &ry)).abs());
        checked += 1;
    }
    check(worst < 1e-10, format!("brute-force disagreement {worst:e}"))?;
    Ok(format!("1000 tied instances, max disagreement {worst:.1e}"))
}

fn criterion_11() -> Outcome {
    let mut rng = seed::rng(1111);
    let (m, d) = (80, 10);
    let mut data = Vec::with_capacity(m * d);
    let mut gold = Vec::with_capacity(m);
    for i in 0..m {
        let centre = if i < m / 2 { 0.0 } else { 8.0 };
        gold.push(usize::from(i >= m / 2));
        data.extend((0..d).map(|_| centre + rng.sample::<f64, _>(rand_distr::StandardNormal)));
    }
    let cfg = TsneConfig {
        perplexity: 15.0,
        seed: 5,
        ..Default::default()
    };
    let out = tsne_2d(&data, m, d, &cfg).map_err(|e| e.to_string())?;
    let flat: Vec<f64> = out.points.iter().flat_map(|p| [p[0], p[1]]).collect();
    let km = debias_core::metrics::kmeans(&flat, 2, 2, 10, 9).map_err(|e| e.to_string())?;
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    for (&k, &g) in km.labels.iter().zip(&gold) {
        *table.entry((k, g)).or_default() += 1;
    }
    let purity = (0..2)
        .map(|k| (0..2).map(|g| table.get(&(k, g)).copied().unwrap_or(0)).max().unwrap())
        .sum::<usize>() as f64
        / m as f64;
    check(purity == 1.0, format!("purity {purity}"))?;
    let rises: Vec<_> = out
        .kl_history
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .map(|w| (w[1].0, w[0].1, w[1].1))
        .collect();
    check(rises.is_empty(), format!("KL rose at {:?}", &rises[..rises.len().min(3)]))?;
    let (first, last) = (out.kl_history.first().unwrap().1, out.kl_history.last().unwrap().1);
    Ok(format!("purity 1.0; KL {first:.4} -> {last:.4} over {} steps, never rising", out.kl_history.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 WED norm and equidistance", criterion_1),
        ("2 neutralisation", criterion_2),
        ("3 Hungarian optimality", criterion_3),
        ("4 WEAT p and antisymmetry", criterion_4),
        ("5 CDS statistics", criterion_5),
        ("6 CDA frequency symmetry", criterion_6),
        ("7 V-measure", criterion_7),
        ("8 end-to-end directions", criterion_8),
        ("9 grammar golden sentences", criterion_9),
        ("10 Spearman", criterion_10),
        ("11 t-SNE and k-means sanity", criterion_11),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, f) in criteria {
        let number = name.split(' ').next().unwrap();
        if !only.is_empty() && !only.iter().any(|o| o == number) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
