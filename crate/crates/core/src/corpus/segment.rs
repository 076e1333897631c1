//! Rule-based sentence splitter.
//!
//! A boundary is placed after a run of `.`, `!` or `?` (plus any closing
//! quotes or brackets) that is followed by whitespace, unless the period ends
//! a known abbreviation or a single-letter initial, the next word starts in
//! lowercase, or the terminator sits inside a balanced parenthesis pair.

use super::clean::normalize_whitespace;

const ABBREVIATIONS: &[&str] = &[
    "a.m.", "adm.", "apr.", "aug.", "capt.", "cmdr.", "co.", "col.", "corp.", "dec.", "dept.", "dr.",
    "e.g.", "est.", "etc.", "feb.", "fig.", "gen.", "gov.", "i.e.", "inc.", "jan.", "jr.", "jul.",
    "jun.", "lt.", "ltd.", "maj.", "mar.", "messrs.", "mr.", "mrs.", "ms.", "mt.", "no.", "nov.",
    "oct.", "p.m.", "ph.d.", "prof.", "rep.", "rev.", "sen.", "sep.", "sept.", "sgt.", "sr.", "st.",
    "u.k.", "u.n.", "u.s.", "u.s.a.", "vs.",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}' | '\u{00BB}')
}

fn is_abbreviation(token: &str) -> bool {
    let token = token.trim_start_matches(['(', '[', '"', '\'', '\u{201C}', '\u{2018}']);
    let lower = token.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single-letter initials such as "J."
    let mut chars = token.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

/// For every index of `(`, whether a matching `)` closes it later.
fn paren_depth_map(chars: &[char]) -> Vec<u32> {
    let mut matched_open = vec![false; chars.len()];
    let mut stack = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '(' => stack.push(i),
            ')' => {
                if let Some(open) = stack.pop() {
                    matched_open[open] = true;
                }
            }
            _ => {}
        }
    }
    let mut depth = 0u32;
    let mut out = Vec::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        if c == '(' && matched_open[i] {
            depth += 1;
        } else if c == ')' && depth > 0 {
            depth -= 1;
        }
        out.push(depth);
    }
    out
}

/// Split text into sentences. Whitespace is collapsed first; returned
/// segments are trimmed and non-empty.
pub fn split_sentences(text: &str) -> Vec<String> {
    let text = normalize_whitespace(text);
    let chars: Vec<char> = text.chars().collect();
    let depth = paren_depth_map(&chars);
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !is_terminator(chars[i]) {
            i += 1;
            continue;
        }
        let term_start = i;
        while i < chars.len() && is_terminator(chars[i]) {
            i += 1;
        }
        let only_period = chars[term_start..i].iter().all(|&c| c == '.') && i - term_start == 1;
        while i < chars.len() && is_closer(chars[i]) {
            i += 1;
        }
        let at_end = i >= chars.len();
        if !at_end && chars[i] != ' ' {
            continue;
        }
        if depth[i - 1] > 0 {
            continue;
        }
        if only_period && !at_end {
            let token_start = chars[..term_start]
                .iter()
                .rposition(|c| *c == ' ')
                .map_or(0, |p| p + 1);
            let token: String = chars[token_start..=term_start].iter().collect();
            if is_abbreviation(&token) {
                continue;
            }
            let next_word = chars[i + 1..].iter().find(|c| c.is_alphanumeric());
            if next_word.is_some_and(|c| c.is_lowercase()) {
                continue;
            }
        }
        let seg: String = chars[start..i].iter().collect();
        let seg = seg.trim();
        if !seg.is_empty() {
            out.push(seg.to_string());
        }
        start = i;
    }
    let tail: String = chars[start.min(chars.len())..].iter().collect();
    let tail = tail.trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}
