//! Shallow, deterministic span detection for the perturbation generators.

use crate::corpus::is_stopword;

/// A run of alphanumeric characters; offsets are byte positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub start: usize,
    pub end: usize,
    pub text: &'a str,
}

pub fn tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(Token { start: s, end: i, text: &text[s..i] });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { start: s, end: text.len(), text: &text[s..] });
    }
    out
}

fn is_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
    let after = text[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
    before && after
}

/// Every whole-word occurrence of `term` as `(start, end)`. Case-insensitive
/// matching folds ASCII only, so byte offsets carry over.
pub fn find_all(text: &str, term: &str, case_insensitive: bool) -> Vec<(usize, usize)> {
    if term.is_empty() {
        return Vec::new();
    }
    let (hay, needle) = if case_insensitive {
        (text.to_ascii_lowercase(), term.to_ascii_lowercase())
    } else {
        (text.to_string(), term.to_string())
    };
    hay.match_indices(&needle)
        .map(|(s, m)| (s, s + m.len()))
        .filter(|&(s, e)| is_word_boundary(text, s, e))
        .collect()
}

/// Leftmost whole-word match of any term, longest on ties:
/// `(start, end, term index)`.
pub fn find_first_term<S: AsRef<str>>(text: &str, terms: &[S], case_insensitive: bool) -> Option<(usize, usize, usize)> {
    terms
        .iter()
        .enumerate()
        .filter_map(|(i, t)| find_all(text, t.as_ref(), case_insensitive).first().map(|&(s, e)| (s, e, i)))
        .min_by_key(|&(s, e, i)| (s, std::cmp::Reverse(e), i))
}

/// True when only non-alphanumeric characters precede `pos`.
pub fn at_sentence_start(text: &str, pos: usize) -> bool {
    !text[..pos].chars().any(char::is_alphanumeric)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
}

/// A person reference. `end` includes a possessive `'s` when present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PersonMention {
    pub start: usize,
    pub end: usize,
    pub possessive: bool,
    pub gender: Option<Gender>,
}

/// Finds the first person mention in a sentence. Swap in a real NER by
/// implementing this.
pub trait PersonTagger {
    fn first_person(&self, text: &str) -> Option<PersonMention>;
}

const HONORIFICS: &[(&str, Option<Gender>)] = &[
    ("Mr", Some(Gender::Male)),
    ("Mrs", Some(Gender::Female)),
    ("Ms", Some(Gender::Female)),
    ("Miss", Some(Gender::Female)),
    ("Dr", None),
    ("Prof", None),
    ("Sen", None),
    ("Senator", None),
    ("Rep", None),
    ("Gov", None),
    ("Governor", None),
    ("President", None),
    ("Judge", None),
    ("Gen", None),
];

/// Capitalized words that start clauses or name institutions, never people.
const NOT_NAMES: &[&str] = &[
    "according", "although", "american", "americans", "april", "august", "congress", "court", "december",
    "democrat", "democratic", "democrats", "despite", "february", "friday", "however", "house", "january",
    "july", "june", "march", "may", "meanwhile", "monday", "november", "october", "police", "republican",
    "republicans", "saturday", "senate", "september", "since", "state", "sunday", "supreme", "thursday",
    "today", "tomorrow", "tuesday", "wednesday", "white", "yesterday",
];

fn name_shaped(word: &str) -> bool {
    let mut chars = word.chars();
    let Some(first) = chars.next() else { return false };
    let rest: Vec<char> = chars.collect();
    first.is_ascii_uppercase() && !rest.is_empty() && rest.iter().all(|c| c.is_ascii_lowercase())
}

/// Honorific plus capitalized words, capitalized runs of two or more words,
/// or a capitalized possessive anywhere but the first word. Words inside any
/// excluded term (locations, group names) never count.
#[derive(Debug, Clone, Default)]
pub struct HeuristicPersonTagger {
    pub exclude: Vec<String>,
}

impl HeuristicPersonTagger {
    pub fn new(exclude: Vec<String>) -> Self {
        Self { exclude }
    }

    fn possessive_len(text: &str, end: usize) -> usize {
        for suffix in ["'s", "\u{2019}s"] {
            let after = end + suffix.len();
            if text[end..].starts_with(suffix) && text[after..].chars().next().is_none_or(|c| !c.is_alphanumeric()) {
                return suffix.len();
            }
        }
        0
    }

    fn mention(text: &str, start: usize, end: usize, gender: Option<Gender>) -> PersonMention {
        let pos = Self::possessive_len(text, end);
        PersonMention {
            start,
            end: end + pos,
            possessive: pos > 0,
            gender,
        }
    }
}

impl PersonTagger for HeuristicPersonTagger {
    fn first_person(&self, text: &str) -> Option<PersonMention> {
        let toks = tokens(text);
        let excluded: Vec<(usize, usize)> = self
            .exclude
            .iter()
            .flat_map(|t| find_all(text, t, false))
            .collect();
        let usable = |t: &Token| {
            name_shaped(t.text)
                && !HONORIFICS.iter().any(|(h, _)| *h == t.text)
                && !is_stopword(&t.text.to_ascii_lowercase())
                && !NOT_NAMES.contains(&t.text.to_ascii_lowercase().as_str())
                && !excluded.iter().any(|&(s, e)| t.start < e && s < t.end)
        };
        // Extend a run of usable words joined by single spaces.
        let run_end = |from: usize| {
            let mut j = from;
            while j + 1 < toks.len() && &text[toks[j].end..toks[j + 1].start] == " " && usable(&toks[j + 1]) {
                j += 1;
            }
            j
        };
        for (i, t) in toks.iter().enumerate() {
            if let Some(&(_, gender)) = HONORIFICS.iter().find(|(h, _)| *h == t.text) {
                let gap = &text[t.end..toks.get(i + 1).map_or(t.end, |n| n.start)];
                if i + 1 < toks.len() && (gap == " " || gap == ". ") && usable(&toks[i + 1]) {
                    let last = run_end(i + 1);
                    return Some(Self::mention(text, t.start, toks[last].end, gender));
                }
            }
            if !usable(t) {
                continue;
            }
            let last = run_end(i);
            if last > i {
                return Some(Self::mention(text, t.start, toks[last].end, None));
            }
            if i > 0 && Self::possessive_len(text, t.end) > 0 {
                return Some(Self::mention(text, t.start, t.end, None));
            }
        }
        None
    }
}

/// Text to splice in at byte offset `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Insertion {
    pub at: usize,
    pub text: String,
}

const AUXILIARIES: &[&str] = &["has", "have", "had", "is", "are", "was", "were"];
const MODALS: &[&str] = &["will", "would", "could", "can", "may", "might", "must", "should"];
const DETERMINERS: &[&str] = &["the", "this", "that", "these", "those", "its", "their", "his", "her", "our", "my", "your"];
const NOT_VERBS: &[&str] = &["hundred", "indeed", "united", "need", "speed", "seed", "feed", "bred", "shed", "red", "bed"];

fn lower_alpha(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| c.is_ascii_lowercase())
}

fn verb_candidate(word: &str) -> bool {
    lower_alpha(word) && word.len() >= 4 && word.ends_with("ed") && !NOT_VERBS.contains(&word)
}

/// Where to put a loaded adverb: after the first auxiliary, else after the
/// first modal, else before the first past-tense-looking word. The first
/// word of the sentence is never a slot. Returns (token index, insert after).
pub fn adverb_slot(toks: &[Token]) -> Option<(usize, bool)> {
    let lower: Vec<String> = toks.iter().map(|t| t.text.to_ascii_lowercase()).collect();
    let find = |set: &[&str]| (1..toks.len()).find(|&i| set.contains(&lower[i].as_str()));
    if let Some(i) = find(AUXILIARIES) {
        return Some((i, true));
    }
    if let Some(i) = find(MODALS) {
        return Some((i, true));
    }
    (1..toks.len()).find(|&i| verb_candidate(toks[i].text)).map(|i| (i, false))
}

/// Where to put a loaded adjective: before the first numeral (or the
/// currency sign glued to it), else before a lowercase content word directly
/// after a determiner, searching after the adverb's token `avoid` first.
pub fn adjective_slot(text: &str, toks: &[Token], avoid: usize) -> Option<usize> {
    if let Some(t) = toks.iter().find(|t| t.text.starts_with(|c: char| c.is_ascii_digit())) {
        let before = &text[..t.start];
        return Some(match before.chars().next_back() {
            Some(c @ ('$' | '\u{20ac}' | '\u{a3}')) => t.start - c.len_utf8(),
            _ => t.start,
        });
    }
    (avoid + 1..toks.len())
        .chain(1..avoid)
        .find(|&i| {
            let det = toks[i - 1].text.to_ascii_lowercase();
            let w = toks[i].text;
            i != avoid
                && DETERMINERS.contains(&det.as_str())
                && &text[toks[i - 1].end..toks[i].start] == " "
                && lower_alpha(w)
                && !is_stopword(w)
                && !w.ends_with("ly")
                && !verb_candidate(w)
                && !AUXILIARIES.contains(&w)
                && !MODALS.contains(&w)
        })
        .map(|i| toks[i].start)
}

/// Adverb and adjective insertion points, or `None` when either slot is
/// missing. The adverb string is `" {adverb}"` when it follows its anchor and
/// `"{adverb} "` when it precedes it.
pub fn dir_insertions(text: &str, adverb: &str, adjective: &str) -> Option<[Insertion; 2]> {
    let toks = tokens(text);
    let (verb, after) = adverb_slot(&toks)?;
    let adj_at = adjective_slot(text, &toks, verb)?;
    let adv = if after {
        Insertion { at: toks[verb].end, text: format!(" {adverb}") }
    } else {
        Insertion { at: toks[verb].start, text: format!("{adverb} ") }
    };
    if adv.at == adj_at {
        return None;
    }
    Some([adv, Insertion { at: adj_at, text: format!("{adjective} ") }])
}

pub fn apply_insertions(text: &str, insertions: &[Insertion]) -> String {
    let mut sorted: Vec<&Insertion> = insertions.iter().collect();
    sorted.sort_by_key(|m| std::cmp::Reverse(m.at));
    let mut out = text.to_string();
    for ins in sorted {
        out.insert_str(ins.at, &ins.text);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_on_non_alphanumerics() {
        let t: Vec<&str> = tokens("The U.S. has 400 doses.").iter().map(|t| t.text).collect();
        assert_eq!(t, ["The", "U", "S", "has", "400", "doses"]);
    }

    #[test]
    fn term_search_respects_word_boundaries() {
        assert_eq!(find_all("Ohio and Ohioans", "Ohio", false), [(0, 4)]);
        assert_eq!(find_first_term("In New York and York", &["York", "New York"], false), Some((3, 11, 1)));
        assert_eq!(find_all("U.S. eyes", "U.S.", false), [(0, 4)]);
        assert_eq!(find_all("MUSLIMS and muslims", "Muslims", true), [(0, 7), (12, 19)]);
    }

    #[test]
    fn person_rules() {
        let tagger = HeuristicPersonTagger::new(vec!["New York".into()]);
        let m = tagger.first_person("Despite Portman's insistence, she left.").unwrap();
        assert_eq!((m.start, m.end, m.possessive), (8, 17, true));
        let m = tagger.first_person("Joe Biden said no.").unwrap();
        assert_eq!((m.start, m.end, m.possessive), (0, 9, false));
        let m = tagger.first_person("Yesterday Mr. Smith left.").unwrap();
        assert_eq!((m.start, m.end, m.gender), (10, 19, Some(Gender::Male)));
        assert_eq!(tagger.first_person("In New York it rained."), None);
        assert_eq!(tagger.first_person("Portman's film won."), None);
        assert_eq!(tagger.first_person("The Supreme Court ruled."), None);
    }

    #[test]
    fn dir_slots_for_the_vaccine_example() {
        let text = "The EU has secured up to 400 million doses.";
        let ins = dir_insertions(text, "shockingly", "outrageous").unwrap();
        assert_eq!(
            apply_insertions(text, &ins),
            "The EU has shockingly secured up to outrageous 400 million doses."
        );
    }

    #[test]
    fn dir_fallbacks() {
        let text = "The senator praised the bill.";
        let ins = dir_insertions(text, "brazenly", "radical").unwrap();
        assert_eq!(apply_insertions(text, &ins), "The senator brazenly praised the radical bill.");
        let text = "Officials will spend $5 billion.";
        let ins = dir_insertions(text, "recklessly", "absurd").unwrap();
        assert_eq!(apply_insertions(text, &ins), "Officials will recklessly spend absurd $5 billion.");
        assert_eq!(dir_insertions("Rain fell.", "a", "b"), None);
    }
}
