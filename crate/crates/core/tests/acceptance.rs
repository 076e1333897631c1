//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use lexbias::annotate::{parse_label, tally, AnnotateError, ExcludedReason, LabelPhrases, ParsedLabel, VotePolicy};
use lexbias::baseline::{featurize, gradient_check, random_weights, train, TrainConfig, Vocabulary};
use lexbias::checklist::{
    self, Expectation, Lexicons, PerturbationCase, Suite, TestType, POSSESSIVES, PRONOUNS,
};
use lexbias::corpus::SentenceRecord;
use lexbias::digest::file_sha256;
use lexbias::io::{read_csv, read_jsonl};
use lexbias::metrics::{confusion, mcc, mcnemar, mcnemar_counts, ConfusionCounts, LabelRow};
use lexbias::pipeline::run_pipeline;
use lexbias::prompting::{
    load_examples, render_prompt, EmbeddingProvider, EmbeddingVector, ExamplePool, PromptError, BENCHMARK_SETTINGS,
    CLASSIFY_LINE,
};
use lexbias::sampling::{
    coreset_select, covering_radius, euclidean, k_center_greedy, postsample_balanced, presample_balanced, split,
    weak_cell_counts, DatasetRow, LabeledSentence, SplitRatios, SplitTag, WeakLabeledSentence,
};
use lexbias::seed::rng;
use lexbias::{BiasLabel, PoliticalLeaning};
use rand::Rng;

/// Seed under which the checklist generators reproduce the reference
/// example perturbations with the shipped lexicons.
const CHECKLIST_SEED: u64 = 77306;

type Outcome = Result<String, String>;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn labels(bits: &[bool]) -> Vec<BiasLabel> {
    bits.iter().map(|&b| BiasLabel::from_bool(b)).collect()
}

// 1
fn mcc_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = r.random_range(1..=200);
        let pb = r.random_range(0.0..1.0);
        let gb = r.random_range(0.0..1.0);
        let p: Vec<bool> = (0..n).map(|_| r.random_bool(pb)).collect();
        let g: Vec<bool> = (0..n).map(|_| r.random_bool(gb)).collect();
        let got = mcc(&confusion(&labels(&p), &labels(&g)).map_err(|e| e.to_string())?);
        let x: Vec<f64> = p.iter().map(|&b| b as u8 as f64).collect();
        let y: Vec<f64> = g.iter().map(|&b| b as u8 as f64).collect();
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        let want = if sxx == 0.0 || syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
        let d = (got - want).abs();
        ensure(d <= 1e-9, || format!("case {case}: mcc {got} vs pearson {want}"))?;
        worst = worst.max(d);
    }
    let single = mcc(&confusion(&[BiasLabel::Biased; 7], &[BiasLabel::Biased; 7]).map_err(|e| e.to_string())?);
    ensure(single == 0.0, || format!("single-class case gave {single}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("1000 cases, max |mcc - pearson| = {worst:.1e}, {secs:.2} s"))
}

// 2
fn mcc_spots() -> Outcome {
    let v = mcc(&ConfusionCounts { tp: 3, tn: 2, fp: 1, fn_: 1 });
    ensure((v - 0.416667).abs() <= 1e-6, || format!("(3,2,1,1) gave {v}"))?;
    ensure((v - 5.0 / 12.0).abs() < 1e-15, || format!("(3,2,1,1) gave {v}, want 5/12"))?;
    for (tp, tn, fp, fn_, want) in [(10, 7, 0, 0, 1.0), (0, 0, 6, 9, -1.0), (1, 1, 0, 0, 1.0), (0, 0, 1, 1, -1.0)] {
        let got = mcc(&ConfusionCounts { tp, tn, fp, fn_ });
        ensure(got == want, || format!("({tp},{tn},{fp},{fn_}) gave {got}"))?;
    }
    Ok(format!("(3,2,1,1) -> {v:.6}; perfect and inverted exact"))
}

/// Longest-first mention counting written independently of the parser.
fn parse_oracle(raw: &str) -> ParsedLabel {
    let negative = regex::Regex::new(r"(?i)\bnot biased\b").unwrap();
    let positive = regex::Regex::new(r"(?i)\bbiased\b").unwrap();
    let neg = negative.find_iter(raw).count();
    let rest = negative.replace_all(raw, " # ");
    let pos = positive.find_iter(&rest).count();
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => ParsedLabel::Biased,
        std::cmp::Ordering::Less => ParsedLabel::NotBiased,
        std::cmp::Ordering::Equal => ParsedLabel::Inconclusive,
    }
}

// 3
fn parser_suite() -> Outcome {
    use ParsedLabel::{Biased as B, Inconclusive as Q, NotBiased as N};
    let cases: &[(&str, ParsedLabel)] = &[
        ("The answer is NOT BIASED.", N),
        ("The answer is BIASED.", B),
        ("BIASED", B),
        ("NOT BIASED", N),
        ("biased", B),
        ("not biased", N),
        ("Not Biased", N),
        ("The sentence is Biased.", B),
        ("It could be BIASED or NOT BIASED.", Q),
        ("I cannot tell.", Q),
        ("", Q),
        ("The wording is unbiased and balanced.", Q),
        ("BIASED. Actually, on reflection, BIASED.", B),
        ("NOT BIASED, clearly NOT BIASED, though some may say BIASED.", N),
        ("BIASED BIASED NOT BIASED", B),
        ("Label: NOT-BIASED", B),
        ("The answer is \"NOT BIASED\"", N),
        ("Answer: biased\nExplanation: loaded adjectives.", B),
        ("This is not biased.", N),
        ("This text is not strongly biased.", B),
        ("BIASEDNESS is not a label.", Q),
        ("**BIASED**", B),
        ("(not biased)", N),
        ("Output: Let's think step by step. The sentence uses neutral wording. The answer is NOT BIASED.", N),
    ];
    let phrases = LabelPhrases::default();
    for (raw, want) in cases {
        let got = parse_label(raw, &phrases);
        let oracle = parse_oracle(raw);
        ensure(got == *want && oracle == *want, || {
            format!("{raw:?}: parser {got:?}, oracle {oracle:?}, expected {want:?}")
        })?;
    }
    Ok(format!("{} handcrafted responses match the oracle", cases.len()))
}

fn vote_oracle(votes: &[ParsedLabel; 3], policy: VotePolicy) -> (Option<BiasLabel>, Option<ExcludedReason>) {
    let b = votes.iter().filter(|v| **v == ParsedLabel::Biased).count();
    let n = votes.iter().filter(|v| **v == ParsedLabel::NotBiased).count();
    let q = 3 - b - n;
    if policy == VotePolicy::ExcludeOnInconclusive && q > 0 {
        return (None, Some(ExcludedReason::HasInconclusive));
    }
    if b > n {
        (Some(BiasLabel::Biased), None)
    } else if n > b {
        (Some(BiasLabel::NotBiased), None)
    } else {
        (None, Some(ExcludedReason::Tie))
    }
}

// 4
fn majority_vote() -> Outcome {
    let mut checked = 0;
    for policy in [VotePolicy::ExcludeOnInconclusive, VotePolicy::VoteDecisive] {
        for a in ParsedLabel::ALL {
            for b in ParsedLabel::ALL {
                for c in ParsedLabel::ALL {
                    let votes = vec![("m1".to_string(), a), ("m2".to_string(), b), ("m3".to_string(), c)];
                    let got = tally("s", &votes, policy).map_err(|e| e.to_string())?;
                    let want = vote_oracle(&[a, b, c], policy);
                    ensure((got.final_label, got.excluded_reason) == want, || {
                        format!("{policy:?} {a:?},{b:?},{c:?}: got {:?}", (got.final_label, got.excluded_reason))
                    })?;
                    checked += 1;
                }
            }
        }
    }
    let two = vec![("m1".to_string(), ParsedLabel::Biased), ("m2".to_string(), ParsedLabel::Biased)];
    ensure(tally("s", &two, VotePolicy::default()) == Err(AnnotateError::EvenPanel(2)), || {
        "panel of two accepted".into()
    })?;
    Ok(format!("{checked} tuples across both policies; panel of 2 rejected"))
}

/// Text `v<i>` embeds to vector `i`.
struct IndexedVectors(Vec<Vec<f64>>);

impl EmbeddingProvider for IndexedVectors {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, PromptError> {
        let i: usize = text[1..].parse().map_err(|_| PromptError::EmptyText)?;
        Ok(EmbeddingVector {
            values: self.0[i].clone(),
        })
    }
}

// 5
fn kate_retrieval() -> Outcome {
    let mut r = rng(5);
    let dim = 12;
    let mut vecs: Vec<Vec<f64>> = (0..600).map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    // exact duplicates exercise the index tie-break
    for i in 0..20 {
        vecs[i + 100] = vecs[i].clone();
    }
    let provider = IndexedVectors(vecs.clone());
    let examples = (0..500)
        .map(|i| lexbias::prompting::PromptExample {
            text: format!("v{i}"),
            label: BiasLabel::NotBiased,
            explanation: String::new(),
        })
        .collect();
    let pool = ExamplePool::new(examples, &provider).map_err(|e| e.to_string())?;
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    let mut checked = 0;
    for q in 0..100 {
        // half the queries reuse pool vectors so ties and self-matches occur
        let qi = if q % 2 == 0 { 500 + q / 2 } else { r.random_range(0..500) };
        let mut order: Vec<(f64, usize)> = (0..500).map(|i| (cos(&vecs[qi], &vecs[i]), i)).collect();
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for k in [2, 4, 8] {
            let mut want: Vec<usize> = order[..k].iter().map(|p| p.1).collect();
            want.reverse();
            let got = pool.retrieve(&format!("v{qi}"), k, &provider).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("query {qi} k={k}: {got:?} vs {want:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} retrievals over 500 vectors equal brute-force top-k"))
}

// 6
fn prompt_goldens() -> Outcome {
    let golden = crate_dir().join("tests/golden");
    let pool = load_examples(&golden.join("prompt_pool.csv")).map_err(|e| e.to_string())?;
    let target = "Lawmakers slammed the outrageous proposal as a betrayal of voters.";
    for s in BENCHMARK_SETTINGS {
        let want = std::fs::read_to_string(golden.join(format!("prompts/{}.txt", s.name()))).map_err(|e| e.to_string())?;
        let got = render_prompt(target, &pool[..s.shots], s).map_err(|e| e.to_string())?;
        ensure(got.text == want, || format!("{} differs from golden", s.name()))?;
        let n = got.text.matches(CLASSIFY_LINE).count();
        ensure(n == s.shots + 1, || format!("{}: instruction appears {n} times", s.name()))?;
    }
    Ok("9 settings byte-identical to goldens".into())
}

fn sentence(id: String, leaning: PoliticalLeaning) -> SentenceRecord {
    SentenceRecord {
        text: format!("text of {id}"),
        sentence_id: id,
        leaning,
        outlet: "o".into(),
        article_id: "a".into(),
    }
}

// 7
fn balancing() -> Outcome {
    let mut r = rng(7);
    for corpus in 0..10 {
        let mut pool = Vec::new();
        let mut labeled = Vec::new();
        for (li, l) in PoliticalLeaning::ALL.into_iter().enumerate() {
            for biased in [true, false] {
                let n = r.random_range(5..80);
                for i in 0..n {
                    let s = sentence(format!("c{corpus}-{li}-{biased}-{i:03}"), l);
                    let score = if biased { r.random_range(0.5..=1.0) } else { r.random_range(0.0..0.5) };
                    pool.push(WeakLabeledSentence::new(s.clone(), score).map_err(|e| e.to_string())?);
                    let label = BiasLabel::from_bool(r.random_bool(0.6));
                    labeled.push(LabeledSentence { sentence: s, label });
                }
            }
        }
        let pre = presample_balanced(&pool, None, corpus).map_err(|e| e.to_string())?;
        let cells = weak_cell_counts(&pre);
        let min = weak_cell_counts(&pool).values().copied().min().unwrap();
        ensure(cells.len() == 10 && cells.values().all(|&c| c == min), || format!("corpus {corpus}: cells {cells:?}"))?;

        let post = postsample_balanced(&labeled, corpus);
        for l in PoliticalLeaning::ALL {
            let b = post.iter().filter(|s| s.sentence.leaning == l && s.label.is_biased()).count();
            let n = post.iter().filter(|s| s.sentence.leaning == l && !s.label.is_biased()).count();
            ensure(b == n, || format!("corpus {corpus} {l:?}: {b} vs {n}"))?;
        }

        let ds = split(&post, SplitRatios::default(), corpus).map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        for d in &ds.items {
            ensure(seen.insert(d.item.sentence.sentence_id.clone()), || "sentence in two splits".into())?;
        }
        let input: HashSet<String> = post.iter().map(|s| s.sentence.sentence_id.clone()).collect();
        ensure(seen == input, || format!("corpus {corpus}: split is not exhaustive"))?;
        let mut strata: BTreeMap<(PoliticalLeaning, BiasLabel), [usize; 3]> = BTreeMap::new();
        for d in &ds.items {
            let slot = SplitTag::ALL.iter().position(|t| *t == d.split).unwrap();
            strata.entry((d.item.sentence.leaning, d.item.label)).or_default()[slot] += 1;
        }
        for (key, counts) in strata {
            let n: usize = counts.iter().sum();
            for (c, ratio) in counts.iter().zip([0.7, 0.15, 0.15]) {
                let dev = (*c as f64 - ratio * n as f64).abs();
                ensure(dev <= 1.0, || format!("corpus {corpus} stratum {key:?}: {counts:?} of {n}"))?;
            }
        }
    }
    Ok("10 corpora: equal cells, 1:1 per leaning, splits within 1 per stratum".into())
}

// 8
fn coreset() -> Outcome {
    let xs: [f64; 4] = [0.0, 1.0, 2.0, 10.0];
    let trace = k_center_greedy(4, 3, 0, |i, j| (xs[i] - xs[j]).abs());
    ensure(trace == vec![0, 3, 2], || format!("colinear trace {trace:?}"))?;
    let mut r = rng(8);
    let mut instances = 0;
    let mut worst_ratio: f64 = 0.0;
    for n in 2..=12usize {
        for _ in 0..6 {
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random_range(0.0..10.0), r.random_range(0.0..10.0)]).collect();
            let d = |i: usize, j: usize| euclidean(&pts[i], &pts[j]);
            for m in 1..n {
                let got = coreset_select(&pts, m, instances as u64).map_err(|e| e.to_string())?;
                let radius = covering_radius(n, &got, d);
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize != m {
                        continue;
                    }
                    let centers: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                    best = best.min(covering_radius(n, &centers, d));
                }
                ensure(radius <= 2.0 * best + 1e-12, || format!("n={n} m={m}: {radius} > 2 x {best}"))?;
                if best > 0.0 {
                    worst_ratio = worst_ratio.max(radius / best);
                }
                instances += 1;
            }
        }
    }
    Ok(format!("colinear trace ok; {instances} instances, worst radius/opt = {worst_ratio:.3}"))
}

struct PipelineRuns {
    out: tempfile::TempDir,
    cold_secs: f64,
    cold_calls: usize,
    warm_calls: usize,
    summary: lexbias::pipeline::PipelineSummary,
}

fn run_fixture_pipeline() -> Result<PipelineRuns, String> {
    let cfg = crate_dir().join("fixtures/mock/pipeline.toml");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let cold = run_pipeline(&cfg, out.path(), vec!["acceptance".into()]).map_err(|e| e.to_string())?;
    let cold_secs = start.elapsed().as_secs_f64();
    let warm = run_pipeline(&cfg, out.path(), vec!["acceptance".into()]).map_err(|e| e.to_string())?;
    Ok(PipelineRuns {
        out,
        cold_secs,
        cold_calls: cold.network_calls,
        warm_calls: warm.network_calls,
        summary: warm,
    })
}

// 9
fn end_to_end(runs: &PipelineRuns) -> Outcome {
    let golden: BTreeMap<String, String> = serde_json::from_str(
        &std::fs::read_to_string(crate_dir().join("tests/golden/pipeline_digests.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    for (rel, want) in &golden {
        let got = file_sha256(&runs.out.path().join(rel)).map_err(|e| e.to_string())?;
        ensure(&got == want, || format!("{rel}: digest {got}"))?;
    }
    let ensemble = std::fs::read(runs.out.path().join("annotate/ensemble.jsonl")).map_err(|e| e.to_string())?;
    let want = std::fs::read(crate_dir().join("tests/golden/ensemble.jsonl")).map_err(|e| e.to_string())?;
    ensure(ensemble == want, || "ensemble.jsonl differs from golden file".into())?;
    let results: Vec<serde_json::Value> = read_jsonl(&runs.out.path().join("annotate/ensemble.jsonl")).map_err(|e| e.to_string())?;
    ensure(results.len() == 200, || format!("{} ensemble results", results.len()))?;
    ensure(runs.cold_calls > 0 && runs.warm_calls == 0, || {
        format!("network calls cold {} warm {}", runs.cold_calls, runs.warm_calls)
    })?;
    ensure(runs.cold_secs < 60.0, || format!("cold run took {:.1} s", runs.cold_secs))?;
    Ok(format!(
        "{} golden digests match; cold {} calls in {:.2} s, warm 0 calls",
        golden.len(),
        runs.cold_calls,
        runs.cold_secs
    ))
}

/// Upper tail of chi-square with one degree of freedom via Simpson's rule on
/// the standard normal density: P(X > x) = 1 - 2 * integral_0^sqrt(x) phi.
fn chi2_tail_simpson(x: f64) -> f64 {
    let upper = x.sqrt();
    let n = 20_000;
    let h = upper / n as f64;
    let phi = |z: f64| (-z * z / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = phi(0.0) + phi(upper);
    for i in 1..n {
        acc += phi(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * acc * h / 3.0
}

// 10
fn mcnemar_checks() -> Outcome {
    let exact = mcnemar_counts(2, 10).map_err(|e| e.to_string())?;
    ensure((exact.p_value - 158.0 / 4096.0).abs() <= 1e-9, || format!("b=2,c=10 p = {}", exact.p_value))?;
    let chi = mcnemar_counts(40, 20).map_err(|e| e.to_string())?;
    ensure((chi.statistic - 361.0 / 60.0).abs() <= 1e-12, || format!("statistic {}", chi.statistic))?;
    let oracle = chi2_tail_simpson(361.0 / 60.0);
    ensure((chi.p_value - oracle).abs() <= 1e-3 && (chi.p_value - 0.0142).abs() <= 1e-3, || {
        format!("p {} vs oracle {oracle}", chi.p_value)
    })?;
    for (b, c) in [(2, 10), (40, 20), (0, 7), (13, 12), (24, 1), (25, 3), (100, 61)] {
        let x = mcnemar_counts(b, c).map_err(|e| e.to_string())?;
        let y = mcnemar_counts(c, b).map_err(|e| e.to_string())?;
        ensure(x.statistic == y.statistic && x.p_value == y.p_value, || format!("swap ({b},{c}) asymmetric"))?;
    }
    let mut r = rng(10);
    let g: Vec<BiasLabel> = (0..300).map(|_| BiasLabel::from_bool(r.random_bool(0.5))).collect();
    let a: Vec<BiasLabel> = g.iter().map(|&l| if r.random_bool(0.2) { l.inverted() } else { l }).collect();
    let b: Vec<BiasLabel> = g.iter().map(|&l| if r.random_bool(0.3) { l.inverted() } else { l }).collect();
    let ab = mcnemar(&a, &b, &g).map_err(|e| e.to_string())?;
    let ba = mcnemar(&b, &a, &g).map_err(|e| e.to_string())?;
    ensure(ab.p_value == ba.p_value && ab.b == ba.c && ab.c == ba.b, || "swapped models disagree".into())?;
    Ok(format!(
        "exact p = {:.9}, chi2 = {:.6}, p = {:.6} (oracle {:.6})",
        exact.p_value, chi.statistic, chi.p_value, oracle
    ))
}

fn separable_set(n: usize, seed: u64) -> Vec<(String, BiasLabel)> {
    let loaded = ["disgraceful", "reckless", "outrageous", "vicious", "absurd", "shameless", "corrupt", "pathetic"];
    let plain = ["reported", "announced", "scheduled", "published", "measured", "recorded", "approved", "listed"];
    let filler = ["the", "council", "budget", "city", "plan", "today", "officials", "vote", "county", "report", "new"];
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let biased = i % 2 == 0;
            let cue = if biased { loaded } else { plain };
            let mut words: Vec<&str> = (0..6).map(|_| filler[r.random_range(0..filler.len())]).collect();
            for _ in 0..2 {
                words.insert(r.random_range(0..=words.len()), cue[r.random_range(0..cue.len())]);
            }
            (words.join(" "), BiasLabel::from_bool(biased))
        })
        .collect()
}

// 11
fn baseline_checks(runs: &PipelineRuns) -> Outcome {
    let train_rows: Vec<DatasetRow> = read_csv(&runs.out.path().join("dataset/train.csv")).map_err(|e| e.to_string())?;
    let fixture: Vec<(String, BiasLabel)> = train_rows.iter().map(|r| (r.text.clone(), r.label)).collect();
    let separable = separable_set(400, 11);
    let mut worst: f64 = 0.0;
    for (name, data) in [("fixture", &fixture), ("separable", &separable)] {
        let texts: Vec<&str> = data.iter().map(|d| d.0.as_str()).collect();
        let vocab = Vocabulary::build(&texts, 1);
        let xs: Vec<_> = texts.iter().map(|t| featurize(t, &vocab)).collect();
        let ys: Vec<f64> = data.iter().map(|d| d.1.is_biased() as u8 as f64).collect();
        for seed in 0..3 {
            let w = random_weights(vocab.len(), 0.5, seed);
            let err = gradient_check(&w, &xs, &ys, 1e-3, seed);
            ensure(err < 1e-4, || format!("{name} seed {seed}: gradient error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    let cfg = TrainConfig::default();
    let model = train(&separable, &cfg).map_err(|e| e.to_string())?.model;
    let held_out = separable_set(400, 12);
    let preds: Vec<BiasLabel> = held_out.iter().map(|(t, _)| model.label(t)).collect();
    let golds: Vec<BiasLabel> = held_out.iter().map(|d| d.1).collect();
    let rep = lexbias::metrics::score(&preds, &golds).map_err(|e| e.to_string())?;
    ensure(rep.accuracy >= 0.99 && rep.mcc >= 0.95, || format!("acc {} mcc {}", rep.accuracy, rep.mcc))?;
    let again = train(&separable, &cfg).map_err(|e| e.to_string())?.model;
    ensure(model.to_bytes() == again.to_bytes(), || "retraining changed the model bytes".into())?;
    Ok(format!(
        "max gradient error {worst:.1e}; separable acc {:.3} mcc {:.3}; byte-reproducible",
        rep.accuracy, rep.mcc
    ))
}

/// Differing middle of two strings, widened to whole words.
fn edit_span<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    let word = |c: char| c.is_alphanumeric() || c == '.' || c == '\'';
    let ac: Vec<(usize, char)> = a.char_indices().collect();
    let bc: Vec<(usize, char)> = b.char_indices().collect();
    let mut p = 0;
    while p < ac.len() && p < bc.len() && ac[p].1 == bc[p].1 {
        p += 1;
    }
    while p > 0 && word(ac[p - 1].1) {
        p -= 1;
    }
    let mut s = 0;
    while s < ac.len() - p && s < bc.len() - p && ac[ac.len() - 1 - s].1 == bc[bc.len() - 1 - s].1 {
        s += 1;
    }
    while s > 0 && word(ac[ac.len() - s].1) {
        s -= 1;
    }
    let a_end = if s == 0 { a.len() } else { ac[ac.len() - s].0 };
    let b_end = if s == 0 { b.len() } else { bc[bc.len() - s].0 };
    let a_start = if p < ac.len() { ac[p].0 } else { a.len() };
    let b_start = if p < bc.len() { bc[p].0 } else { b.len() };
    (&a[a_start..a_end], &b[b_start..b_end])
}

/// True when replacing one occurrence of a term from `group` in `original`
/// with a different term from `group` yields `perturbed`. Matching ignores
/// case; a doubled period after an abbreviation collapses to one.
fn swaps_within(original: &str, perturbed: &str, group: &[String]) -> bool {
    let lower = original.to_lowercase();
    group.iter().any(|from| {
        let needle = from.to_lowercase();
        lower.match_indices(&needle).any(|(s, _)| {
            let e = s + needle.len();
            group.iter().filter(|to| *to != from).any(|to| {
                [to.clone(), to.to_lowercase(), capitalize(to)].iter().any(|w| {
                    let tail = &original[e..];
                    let tail = if w.ends_with('.') { tail.strip_prefix('.').unwrap_or(tail) } else { tail };
                    format!("{}{}{}", &original[..s], w, tail) == perturbed
                })
            })
        })
    })
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn in_list(term: &str, list: &[String], fold: bool) -> bool {
    let trimmed = term.trim_end_matches([',', ';', ':', '!', '?']);
    [trimmed, trimmed.strip_suffix('.').unwrap_or(trimmed)].iter().any(|t| {
        list.iter().any(|l| if fold { l.eq_ignore_ascii_case(t) } else { l == t })
    })
}

fn check_case_edit(c: &PerturbationCase, lex: &Lexicons) -> Result<(), String> {
    let bad = |why: &str| format!("{} ({why}): {:?} -> {:?}", c.case_id, c.original, c.perturbed);
    match c.test_type {
        TestType::Mft => ensure(c.original == c.perturbed, || bad("MFT text changed")),
        TestType::Dir => {
            let o: Vec<&str> = c.original.split(' ').collect();
            let p: Vec<&str> = c.perturbed.split(' ').collect();
            ensure(p.len() == o.len() + 2, || bad("not two insertions"))?;
            let (mut i, mut extra) = (0, Vec::new());
            for w in &p {
                if i < o.len() && *w == o[i] {
                    i += 1;
                } else {
                    extra.push(*w);
                }
            }
            ensure(i == o.len() && extra.len() == 2, || bad("original not a subsequence"))?;
            let adverb = |w: &str| lex.loaded_adverbs.iter().any(|a| a == w);
            let adjective = |w: &str| lex.loaded_adjectives.iter().any(|a| a == w);
            ensure(
                (adverb(extra[0]) && adjective(extra[1])) || (adjective(extra[0]) && adverb(extra[1])),
                || bad("inserted words are not one adverb and one adjective"),
            )
        }
        TestType::Inv => {
            let (removed, inserted) = edit_span(&c.original, &c.perturbed);
            ensure(!removed.is_empty() && !inserted.is_empty() && removed != inserted, || bad("no substitution"))?;
            let ok = match c.test_name.as_str() {
                "inv-locations" => swaps_within(&c.original, &c.perturbed, &lex.locations),
                "inv-prejudice" => lex.minority_groups.iter().any(|g| swaps_within(&c.original, &c.perturbed, g)),
                "inv-pronouns" => {
                    let words: Vec<String> = PRONOUNS.iter().chain(POSSESSIVES.iter()).map(|s| s.to_string()).collect();
                    removed.starts_with(|ch: char| ch.is_uppercase()) && in_list(inserted, &words, true)
                }
                _ => false,
            };
            ensure(ok, || bad(&format!("edit {removed:?} -> {inserted:?}")))
        }
    }
}

// 12
fn checklist_checks(runs: &PipelineRuns) -> Outcome {
    let lex = Lexicons::default();
    let sentences: Vec<SentenceRecord> =
        read_jsonl(&runs.out.path().join("corpus/sentences.jsonl")).map_err(|e| e.to_string())?;
    let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
    let mut cases = Vec::new();
    for suite in Suite::ALL {
        cases.extend(checklist::generate(suite, &texts, &lex, CHECKLIST_SEED).map_err(|e| e.to_string())?);
    }
    let factual = std::fs::read_to_string(crate_dir().join("fixtures/mock/factual.txt")).map_err(|e| e.to_string())?;
    let factual: Vec<&str> = factual.lines().filter(|l| !l.is_empty()).collect();
    cases.extend(checklist::generate(Suite::MftFactual, &factual, &lex, CHECKLIST_SEED).map_err(|e| e.to_string())?);
    for c in &cases {
        check_case_edit(c, &lex)?;
    }
    let report = checklist::score_suite(&cases, |_| BiasLabel::NotBiased);
    for (name, s) in &report.suites {
        let want = match name.as_str() {
            n if n.starts_with("inv-") => Some(1.0),
            "dir-loaded" => Some(0.0),
            _ => None,
        };
        if let Some(w) = want {
            ensure(s.pass_rate == w && s.cases_total > 0, || format!("constant classifier: {name} pass rate {}", s.pass_rate))?;
        }
    }
    let examples = [
        (
            Suite::InvLocations,
            "Hawaii eyes even stricter gun laws in wake of shooting that killed 2 police officers.",
            "U.S. eyes even stricter gun laws in wake of shooting that killed 2 police officers.",
        ),
        (
            Suite::InvPronouns,
            "Despite Portman's insistence that she has tried to advance female directors, only one of her feature films was directed by a female.",
            "Despite her insistence that she has tried to advance female directors, only one of her feature films was directed by a female.",
        ),
        (
            Suite::InvPrejudice,
            "For some people, Buddha holds immense significance.",
            "For some people, Christ holds immense significance.",
        ),
        (
            Suite::DirLoaded,
            "The EU has secured up to 400 million doses of AstraZeneca ’s experimental vaccine.",
            "The EU has shockingly secured up to outrageous 400 million doses of AstraZeneca ’s experimental vaccine.",
        ),
    ];
    for (suite, input, want) in examples {
        let got = checklist::generate(suite, &[input], &lex, CHECKLIST_SEED).map_err(|e| e.to_string())?;
        let got = got.first().map(|c| c.perturbed.as_str());
        ensure(got == Some(want), || format!("{suite}: got {got:?}"))?;
    }
    let mft = checklist::generate(
        Suite::MftFactual,
        &["What is a stereotype? An unfair, generalization about a group of people."],
        &lex,
        CHECKLIST_SEED,
    )
    .map_err(|e| e.to_string())?;
    ensure(mft[0].expectation == Expectation::PredictEquals(BiasLabel::NotBiased), || "MFT expectation".into())?;
    Ok(format!(
        "{} generated cases pass the edit check; INV 1.0 / DIR 0.0 for a constant classifier; reference examples reproduced with seed {CHECKLIST_SEED}",
        cases.len()
    ))
}

// 13
fn sa_vs_ha(runs: &PipelineRuns) -> Outcome {
    let gold = runs.summary.eval.gold.as_ref().ok_or("pipeline ran without gold labels")?;
    let gold_rows: Vec<LabelRow> = read_csv(&crate_dir().join("fixtures/mock/gold.csv")).map_err(|e| e.to_string())?;
    let gold_map: BTreeMap<String, BiasLabel> = gold_rows.into_iter().map(|r| (r.sentence_id, r.label)).collect();
    let results: Vec<lexbias::annotate::EnsembleResult> =
        read_jsonl(&runs.out.path().join("annotate/ensemble.jsonl")).map_err(|e| e.to_string())?;
    let decided: Vec<_> = results.iter().filter_map(|r| r.final_label.map(|l| (&r.sentence_id, l))).collect();
    let agree = decided.iter().filter(|(id, l)| gold_map.get(*id) == Some(l)).count();
    let agreement = agree as f64 / decided.len() as f64;
    ensure((agreement - 0.85).abs() < 1e-9, || format!("ensemble agreement {agreement}"))?;
    let test_ids: BTreeSet<String> = read_csv::<DatasetRow>(&runs.out.path().join("dataset/test.csv"))
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| r.sentence_id)
        .collect();
    let train_ids: BTreeSet<String> = read_csv::<DatasetRow>(&runs.out.path().join("dataset/train.csv"))
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| r.sentence_id)
        .collect();
    ensure(test_ids.is_disjoint(&train_ids), || "test split overlaps training data".into())?;
    let (sa, ha) = (gold.synthetic_trained.mcc, gold.gold_trained.mcc);
    ensure((sa - ha).abs() <= 0.1, || format!("SA MCC {sa:.3} vs HA MCC {ha:.3}"))?;
    Ok(format!(
        "agreement {agreement:.2}; n_test {}; SA MCC {sa:.3}, HA MCC {ha:.3}, gap {:.3}",
        gold.n_test,
        (sa - ha).abs()
    ))
}

// 14
fn online() -> Option<Outcome> {
    let cfg = std::env::var("LEXBIAS_ONLINE_CONFIG").ok()?;
    let out = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Some(Err(e.to_string())),
    };
    Some((|| {
        let summary = run_pipeline(Path::new(&cfg), out.path(), vec!["acceptance-online".into()]).map_err(|e| e.to_string())?;
        let results: Vec<lexbias::annotate::EnsembleResult> =
            read_jsonl(&out.path().join("annotate/ensemble.jsonl")).map_err(|e| e.to_string())?;
        let unsure = results.iter().filter(|r| r.final_label.is_none()).count() as f64 / results.len().max(1) as f64;
        ensure(unsure < 0.05, || format!("inconclusive rate {unsure:.3}"))?;
        Ok(format!("inconclusive rate {unsure:.3}; {} network calls", summary.network_calls))
    })())
}

fn main() {
    let mut failed = 0;
    let mut passed = 0;
    let mut report = |n: usize, name: &str, outcome: Option<Outcome>| match outcome {
        Some(Ok(detail)) => {
            passed += 1;
            println!("[PASS] {n:>2} {name}: {detail}");
        }
        Some(Err(detail)) => {
            failed += 1;
            println!("[FAIL] {n:>2} {name}: {detail}");
        }
        None => println!("[SKIP] {n:>2} {name}: set LEXBIAS_ONLINE_CONFIG to run"),
    };
    report(1, "MCC oracle equivalence", Some(mcc_oracle()));
    report(2, "MCC spot values", Some(mcc_spots()));
    report(3, "response parser", Some(parser_suite()));
    report(4, "majority vote", Some(majority_vote()));
    report(5, "KATE retrieval", Some(kate_retrieval()));
    report(6, "prompt goldens", Some(prompt_goldens()));
    report(7, "balancing invariants", Some(balancing()));
    report(8, "k-center coreset", Some(coreset()));
    match run_fixture_pipeline() {
        Ok(runs) => {
            report(9, "end-to-end mock pipeline", Some(end_to_end(&runs)));
            report(10, "McNemar", Some(mcnemar_checks()));
            report(11, "baseline classifier", Some(baseline_checks(&runs)));
            report(12, "checklist", Some(checklist_checks(&runs)));
            report(13, "SA vs HA miniature", Some(sa_vs_ha(&runs)));
        }
        Err(e) => {
            report(9, "end-to-end mock pipeline", Some(Err(e.clone())));
            report(10, "McNemar", Some(mcnemar_checks()));
            for (n, name) in [(11, "baseline classifier"), (12, "checklist"), (13, "SA vs HA miniature")] {
                report(n, name, Some(Err(format!("pipeline failed: {e}"))));
            }
        }
    }
    report(14, "online benchmark (optional)", online());
    println!("acceptance: {passed} passed, {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
