use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::labels::BiasLabel;

/// A parsed annotator answer. `Inconclusive` is written as `?`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParsedLabel {
    Biased,
    NotBiased,
    Inconclusive,
}

impl ParsedLabel {
    pub const ALL: [ParsedLabel; 3] = [ParsedLabel::Biased, ParsedLabel::NotBiased, ParsedLabel::Inconclusive];

    pub fn as_str(self) -> &'static str {
        match self {
            ParsedLabel::Biased => "BIASED",
            ParsedLabel::NotBiased => "NOT BIASED",
            ParsedLabel::Inconclusive => "?",
        }
    }

    pub fn decisive(self) -> Option<BiasLabel> {
        match self {
            ParsedLabel::Biased => Some(BiasLabel::Biased),
            ParsedLabel::NotBiased => Some(BiasLabel::NotBiased),
            ParsedLabel::Inconclusive => None,
        }
    }
}

impl From<BiasLabel> for ParsedLabel {
    fn from(l: BiasLabel) -> Self {
        match l {
            BiasLabel::Biased => ParsedLabel::Biased,
            BiasLabel::NotBiased => ParsedLabel::NotBiased,
        }
    }
}

impl fmt::Display for ParsedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ParsedLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ParsedLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw.trim() == "?" {
            return Ok(ParsedLabel::Inconclusive);
        }
        raw.parse::<BiasLabel>().map(Into::into).map_err(serde::de::Error::custom)
    }
}

/// Positive and negative phrase lists used to read labels out of free text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPhrases {
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

impl Default for LabelPhrases {
    fn default() -> Self {
        Self {
            positives: vec!["BIASED".into()],
            negatives: vec!["NOT BIASED".into()],
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn fold(s: &str) -> Vec<char> {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Count label mentions and return the strictly more frequent class.
///
/// Matching is case-insensitive, requires word boundaries on both sides and
/// is non-overlapping: phrases are consumed longest first, so `NOT BIASED`
/// claims its `BIASED` suffix before the shorter phrase is counted. No
/// mentions or a tie give `Inconclusive`.
pub fn parse_label(raw: &str, phrases: &LabelPhrases) -> ParsedLabel {
    let (pos, neg) = count_mentions(raw, phrases);
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => ParsedLabel::Biased,
        std::cmp::Ordering::Less => ParsedLabel::NotBiased,
        std::cmp::Ordering::Equal => ParsedLabel::Inconclusive,
    }
}

/// (positive, negative) mention counts under longest-first consumption.
pub fn count_mentions(raw: &str, phrases: &LabelPhrases) -> (usize, usize) {
    let text = fold(raw);
    let mut consumed = vec![false; text.len()];
    let mut ordered: Vec<(Vec<char>, bool)> = phrases
        .positives
        .iter()
        .map(|p| (fold(p.trim()), true))
        .chain(phrases.negatives.iter().map(|p| (fold(p.trim()), false)))
        .filter(|(p, _)| !p.is_empty())
        .collect();
    // stable: equal lengths keep list order
    ordered.sort_by_key(|o| std::cmp::Reverse(o.0.len()));
    let (mut pos, mut neg) = (0, 0);
    for (phrase, positive) in &ordered {
        let n = phrase.len();
        let mut i = 0;
        while i + n <= text.len() {
            let fits = text[i..i + n] == phrase[..]
                && !consumed[i..i + n].iter().any(|&c| c)
                && (i == 0 || !is_word_char(text[i - 1]))
                && (i + n == text.len() || !is_word_char(text[i + n]));
            if fits {
                consumed[i..i + n].iter_mut().for_each(|c| *c = true);
                if *positive {
                    pos += 1;
                } else {
                    neg += 1;
                }
                i += n;
            } else {
                i += 1;
            }
        }
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(raw: &str) -> ParsedLabel {
        parse_label(raw, &LabelPhrases::default())
    }

    #[test]
    fn spot_cases() {
        assert_eq!(p("Let's think step by step. The answer is BIASED."), ParsedLabel::Biased);
        assert_eq!(p("The answer is NOT BIASED."), ParsedLabel::NotBiased);
        assert_eq!(p("It could be BIASED or NOT BIASED."), ParsedLabel::Inconclusive);
        assert_eq!(p("No idea."), ParsedLabel::Inconclusive);
        assert_eq!(p("The sentence is unbiased."), ParsedLabel::Inconclusive);
    }

    #[test]
    fn counts_respect_consumption() {
        let ph = LabelPhrases::default();
        assert_eq!(count_mentions("not biased, NOT BIASED, biased", &ph), (1, 2));
    }

    #[test]
    fn custom_phrase_lists() {
        let ph = LabelPhrases {
            positives: vec!["Contains lexical bias".into()],
            negatives: vec!["Does not contain lexical bias".into()],
        };
        assert_eq!(parse_label("Answer: does not contain lexical bias", &ph), ParsedLabel::NotBiased);
        assert_eq!(parse_label("It CONTAINS LEXICAL BIAS.", &ph), ParsedLabel::Biased);
    }

    #[test]
    fn serde_question_mark() {
        assert_eq!(serde_json::to_string(&ParsedLabel::Inconclusive).unwrap(), "\"?\"");
        for l in ParsedLabel::ALL {
            let back: ParsedLabel = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
            assert_eq!(back, l);
        }
    }
}
