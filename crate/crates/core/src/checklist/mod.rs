//! Behavioral stress tests: a factual minimum-functionality suite, three
//! invariance suites and a directional loaded-words suite.

mod lexicon;
mod tagger;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{Lexicons, POSSESSIVES, PRONOUNS};
pub use tagger::{
    apply_insertions, at_sentence_start, dir_insertions, find_all, find_first_term, tokens, Gender,
    HeuristicPersonTagger, Insertion, PersonMention, PersonTagger, Token,
};

use crate::error::Result;
use crate::io::read_csv;
use crate::labels::BiasLabel;
use crate::seed::{scoped_rng, SeededRng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChecklistError {
    #[error("lexicon {0} is empty or too small")]
    EmptyLexicon(String),
    #[error("minority group on line {0} has fewer than two distinct members")]
    SmallGroup(usize),
    #[error("no {variant} prediction for case {case_id}")]
    MissingPrediction { case_id: String, variant: Variant },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

impl ChecklistError {
    pub fn kind(&self) -> &'static str {
        match self {
            ChecklistError::EmptyLexicon(_) => "EmptyLexicon",
            ChecklistError::SmallGroup(_) => "SmallGroup",
            ChecklistError::MissingPrediction { .. } => "MissingPrediction",
            ChecklistError::UnknownSuite(_) => "UnknownSuite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestType {
    #[serde(rename = "MFT")]
    Mft,
    #[serde(rename = "INV")]
    Inv,
    #[serde(rename = "DIR")]
    Dir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    MftFactual,
    InvLocations,
    InvPronouns,
    InvPrejudice,
    DirLoaded,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::MftFactual,
        Suite::InvLocations,
        Suite::InvPronouns,
        Suite::InvPrejudice,
        Suite::DirLoaded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MftFactual => "mft-factual",
            Suite::InvLocations => "inv-locations",
            Suite::InvPronouns => "inv-pronouns",
            Suite::InvPrejudice => "inv-prejudice",
            Suite::DirLoaded => "dir-loaded",
        }
    }

    pub fn test_type(self) -> TestType {
        match self {
            Suite::MftFactual => TestType::Mft,
            Suite::DirLoaded => TestType::Dir,
            _ => TestType::Inv,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ChecklistError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| ChecklistError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    Locations,
    Pronouns,
    Minorities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    PredictEquals(BiasLabel),
    PredictionUnchanged,
    FlipsToBiased,
}

/// One test item. MFT cases carry `perturbed == original`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationCase {
    pub case_id: String,
    pub test_name: String,
    pub test_type: TestType,
    pub original: String,
    pub perturbed: String,
    pub expectation: Expectation,
}

fn case(suite: Suite, index: usize, original: &str, perturbed: String, expectation: Expectation) -> PerturbationCase {
    PerturbationCase {
        case_id: format!("{suite}-{index:04}"),
        test_name: suite.name().to_string(),
        test_type: suite.test_type(),
        original: original.to_string(),
        perturbed,
        expectation,
    }
}

/// Each sentence draws from its own generator, so a case does not depend on
/// which other sentences are in the batch.
fn sentence_rng(seed: u64, suite: Suite, sentence: &str) -> SeededRng {
    scoped_rng(seed, &format!("checklist/{suite}/{sentence}"))
}

fn other_index(rng: &mut SeededRng, len: usize, skip: usize) -> usize {
    let j = rng.random_range(0..len - 1);
    if j >= skip {
        j + 1
    } else {
        j
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn splice(text: &str, start: usize, end: usize, with: &str) -> String {
    format!("{}{}{}", &text[..start], with, &text[end..])
}

pub fn gen_mft_factual<S: AsRef<str>>(sentences: &[S]) -> Vec<PerturbationCase> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let s = s.as_ref();
            case(Suite::MftFactual, i, s, s.to_string(), Expectation::PredictEquals(BiasLabel::NotBiased))
        })
        .collect()
}

fn substitute(text: &str, kind: LexiconKind, lex: &Lexicons, rng: &mut SeededRng) -> Option<String> {
    match kind {
        LexiconKind::Locations => {
            let (s, e, i) = find_first_term(text, &lex.locations, false)?;
            let j = other_index(rng, lex.locations.len(), i);
            let with = &lex.locations[j];
            // "in Florida." -> "in U.S." keeps a single period
            let e = if with.ends_with('.') && text[e..].starts_with('.') { e + 1 } else { e };
            Some(splice(text, s, e, with))
        }
        LexiconKind::Minorities => {
            let terms: Vec<(usize, usize, &str)> = lex
                .minority_groups
                .iter()
                .enumerate()
                .flat_map(|(g, group)| group.iter().enumerate().map(move |(m, t)| (g, m, t.as_str())))
                .collect();
            let words: Vec<&str> = terms.iter().map(|t| t.2).collect();
            let (s, e, i) = find_first_term(text, &words, true)?;
            let (g, m, _) = terms[i];
            let group = &lex.minority_groups[g];
            let replacement = &group[other_index(rng, group.len(), m)];
            let replacement = if text[s..].starts_with(|c: char| c.is_uppercase()) {
                capitalize(replacement)
            } else {
                replacement.clone()
            };
            Some(splice(text, s, e, &replacement))
        }
        LexiconKind::Pronouns => {
            let mut exclude = lex.locations.clone();
            exclude.extend(lex.minority_groups.iter().flatten().cloned());
            let m = HeuristicPersonTagger::new(exclude).first_person(text)?;
            let slot = match m.gender {
                Some(Gender::Male) => 0,
                Some(Gender::Female) => 1,
                None => rng.random_range(0..3),
            };
            let word = if m.possessive { POSSESSIVES[slot] } else { PRONOUNS[slot] };
            let word = if at_sentence_start(text, m.start) {
                capitalize(word)
            } else {
                word.to_string()
            };
            Some(splice(text, m.start, m.end, &word))
        }
    }
}

/// Replace the first lexicon hit in each sentence; sentences without a hit
/// are skipped. Case ids keep the input position.
pub fn gen_inv_substitution<S: AsRef<str>>(
    sentences: &[S],
    kind: LexiconKind,
    lex: &Lexicons,
    seed: u64,
) -> std::result::Result<Vec<PerturbationCase>, ChecklistError> {
    let suite = match kind {
        LexiconKind::Locations => {
            if lex.locations.len() < 2 {
                return Err(ChecklistError::EmptyLexicon("locations".into()));
            }
            Suite::InvLocations
        }
        LexiconKind::Minorities => {
            if lex.minority_groups.is_empty() || lex.minority_groups.iter().any(|g| g.len() < 2) {
                return Err(ChecklistError::EmptyLexicon("minorities".into()));
            }
            Suite::InvPrejudice
        }
        LexiconKind::Pronouns => Suite::InvPronouns,
    };
    let mut out = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        let s = s.as_ref();
        let mut rng = sentence_rng(seed, suite, s);
        if let Some(perturbed) = substitute(s, kind, lex, &mut rng) {
            if perturbed != s {
                out.push(case(suite, i, s, perturbed, Expectation::PredictionUnchanged));
            }
        }
    }
    Ok(out)
}

/// Insert one loaded adverb and one loaded adjective per sentence; sentences
/// without both slots are skipped.
pub fn gen_dir_loaded<S: AsRef<str>>(
    sentences: &[S],
    lex: &Lexicons,
    seed: u64,
) -> std::result::Result<Vec<PerturbationCase>, ChecklistError> {
    if lex.loaded_adverbs.is_empty() {
        return Err(ChecklistError::EmptyLexicon("loaded_adverbs".into()));
    }
    if lex.loaded_adjectives.is_empty() {
        return Err(ChecklistError::EmptyLexicon("loaded_adjectives".into()));
    }
    let mut out = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        let s = s.as_ref();
        let mut rng = sentence_rng(seed, Suite::DirLoaded, s);
        let adverb = &lex.loaded_adverbs[rng.random_range(0..lex.loaded_adverbs.len())];
        let adjective = &lex.loaded_adjectives[rng.random_range(0..lex.loaded_adjectives.len())];
        if let Some(ins) = dir_insertions(s, adverb, adjective) {
            out.push(case(Suite::DirLoaded, i, s, apply_insertions(s, &ins), Expectation::FlipsToBiased));
        }
    }
    Ok(out)
}

pub fn generate<S: AsRef<str>>(
    suite: Suite,
    sentences: &[S],
    lex: &Lexicons,
    seed: u64,
) -> std::result::Result<Vec<PerturbationCase>, ChecklistError> {
    match suite {
        Suite::MftFactual => Ok(gen_mft_factual(sentences)),
        Suite::InvLocations => gen_inv_substitution(sentences, LexiconKind::Locations, lex, seed),
        Suite::InvPronouns => gen_inv_substitution(sentences, LexiconKind::Pronouns, lex, seed),
        Suite::InvPrejudice => gen_inv_substitution(sentences, LexiconKind::Minorities, lex, seed),
        Suite::DirLoaded => gen_dir_loaded(sentences, lex, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    Perturbed,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Original => "original",
            Variant::Perturbed => "perturbed",
        })
    }
}

/// A text to classify, keyed the way prediction files are.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseText {
    pub case_id: String,
    pub variant: Variant,
    pub text: String,
}

/// Texts a classifier must label to score `cases`. MFT cases need only the
/// original.
pub fn case_texts(cases: &[PerturbationCase]) -> Vec<CaseText> {
    let mut out = Vec::new();
    for c in cases {
        out.push(CaseText {
            case_id: c.case_id.clone(),
            variant: Variant::Original,
            text: c.original.clone(),
        });
        if c.test_type != TestType::Mft {
            out.push(CaseText {
                case_id: c.case_id.clone(),
                variant: Variant::Perturbed,
                text: c.perturbed.clone(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CasePrediction {
    pub case_id: String,
    pub variant: Variant,
    pub label: BiasLabel,
}

/// Predictions keyed by (case id, variant), as read from a
/// `case_id,variant,label` CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CasePredictions(pub HashMap<(String, Variant), BiasLabel>);

impl CasePredictions {
    pub fn load(path: &Path) -> Result<Self> {
        let rows: Vec<CasePrediction> = read_csv(path)?;
        Ok(Self::from_rows(rows))
    }

    pub fn from_rows(rows: impl IntoIterator<Item = CasePrediction>) -> Self {
        Self(rows.into_iter().map(|r| ((r.case_id, r.variant), r.label)).collect())
    }

    pub fn get(&self, case_id: &str, variant: Variant) -> std::result::Result<BiasLabel, ChecklistError> {
        self.0
            .get(&(case_id.to_string(), variant))
            .copied()
            .ok_or_else(|| ChecklistError::MissingPrediction {
                case_id: case_id.to_string(),
                variant,
            })
    }
}

/// `cases_total` counts scored cases; DIR cases whose original is already
/// predicted Biased are counted in `cases_gated` instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteScore {
    pub cases_total: usize,
    pub cases_passed: usize,
    pub cases_gated: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChecklistReport {
    pub suites: BTreeMap<String, SuiteScore>,
}

impl ChecklistReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("test_name        total  passed  gated  pass_rate\n");
        for (name, s) in &self.suites {
            out.push_str(&format!(
                "{name:<15} {:>6} {:>7} {:>6} {:>10.3}\n",
                s.cases_total, s.cases_passed, s.cases_gated, s.pass_rate
            ));
        }
        out
    }
}

/// Outcome of one case: `None` when the DIR gate drops it.
pub fn case_passes(c: &PerturbationCase, original: BiasLabel, perturbed: impl FnOnce() -> BiasLabel) -> Option<bool> {
    match c.expectation {
        Expectation::PredictEquals(want) => Some(original == want),
        Expectation::PredictionUnchanged => Some(perturbed() == original),
        Expectation::FlipsToBiased => {
            if original != BiasLabel::NotBiased {
                None
            } else {
                Some(perturbed() == BiasLabel::Biased)
            }
        }
    }
}

fn score_with<E>(
    cases: &[PerturbationCase],
    mut label: impl FnMut(&PerturbationCase, Variant) -> std::result::Result<BiasLabel, E>,
) -> std::result::Result<ChecklistReport, E> {
    let mut report = ChecklistReport::default();
    for c in cases {
        let entry = report.suites.entry(c.test_name.clone()).or_default();
        let original = label(c, Variant::Original)?;
        let mut perturbed_err = None;
        let outcome = case_passes(c, original, || match label(c, Variant::Perturbed) {
            Ok(l) => l,
            Err(e) => {
                perturbed_err = Some(e);
                BiasLabel::NotBiased
            }
        });
        if let Some(e) = perturbed_err {
            return Err(e);
        }
        match outcome {
            None => entry.cases_gated += 1,
            Some(pass) => {
                entry.cases_total += 1;
                entry.cases_passed += usize::from(pass);
            }
        }
    }
    for s in report.suites.values_mut() {
        s.pass_rate = if s.cases_total == 0 {
            0.0
        } else {
            s.cases_passed as f64 / s.cases_total as f64
        };
    }
    Ok(report)
}

fn text_of(c: &PerturbationCase, v: Variant) -> &str {
    match v {
        Variant::Original => &c.original,
        Variant::Perturbed => &c.perturbed,
    }
}

pub fn score_suite(cases: &[PerturbationCase], predict: impl Fn(&str) -> BiasLabel) -> ChecklistReport {
    score_with::<std::convert::Infallible>(cases, |c, v| Ok(predict(text_of(c, v)))).unwrap_or_else(|e| match e {})
}

/// Same report as [`score_suite`], with every distinct text classified once
/// across `threads` workers.
pub fn score_suite_parallel(
    cases: &[PerturbationCase],
    predict: impl Fn(&str) -> BiasLabel + Sync,
    threads: usize,
) -> ChecklistReport {
    let mut texts: Vec<&str> = case_texts_ref(cases);
    texts.sort_unstable();
    texts.dedup();
    let chunk = texts.len().div_ceil(threads.max(1)).max(1);
    let labels: HashMap<&str, BiasLabel> = std::thread::scope(|scope| {
        let handles: Vec<_> = texts
            .chunks(chunk)
            .map(|part| {
                let predict = &predict;
                scope.spawn(move || part.iter().map(|t| (*t, predict(t))).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("checklist worker panicked"))
            .collect()
    });
    score_suite(cases, |t| labels[t])
}

fn case_texts_ref(cases: &[PerturbationCase]) -> Vec<&str> {
    cases
        .iter()
        .flat_map(|c| [c.original.as_str(), c.perturbed.as_str()])
        .collect()
}

pub fn score_predictions(
    cases: &[PerturbationCase],
    preds: &CasePredictions,
) -> std::result::Result<ChecklistReport, ChecklistError> {
    score_with(cases, |c, v| preds.get(&c.case_id, v))
}
