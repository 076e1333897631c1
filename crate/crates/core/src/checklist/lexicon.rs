use std::path::Path;

use super::ChecklistError;
use crate::error::Result;
use crate::io::read_text;

const LOCATIONS: &str = include_str!("../../lexicons/locations.txt");
const MINORITIES: &str = include_str!("../../lexicons/minorities.txt");
const ADJECTIVES: &str = include_str!("../../lexicons/loaded_adjectives.txt");
const ADVERBS: &str = include_str!("../../lexicons/loaded_adverbs.txt");

pub const PRONOUNS: [&str; 3] = ["he", "she", "they"];
pub const POSSESSIVES: [&str; 3] = ["his", "her", "their"];

/// Word lists driving the perturbations. Lists are deduplicated in file
/// order; every minority group has at least two members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub locations: Vec<String>,
    pub minority_groups: Vec<Vec<String>>,
    pub loaded_adjectives: Vec<String>,
    pub loaded_adverbs: Vec<String>,
}

fn dedup(items: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for item in items {
        if !item.is_empty() && !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
}

fn non_empty(name: &str, list: Vec<String>) -> std::result::Result<Vec<String>, ChecklistError> {
    if list.is_empty() {
        Err(ChecklistError::EmptyLexicon(name.to_string()))
    } else {
        Ok(list)
    }
}

impl Lexicons {
    /// Parse the four list texts. Minority groups are one per line,
    /// members separated by commas.
    pub fn parse(
        locations: &str,
        minorities: &str,
        adjectives: &str,
        adverbs: &str,
    ) -> std::result::Result<Self, ChecklistError> {
        let mut minority_groups = Vec::new();
        for (i, line) in lines(minorities).enumerate() {
            let group = dedup(line.split(',').map(|t| t.trim().to_string()));
            if group.len() < 2 {
                return Err(ChecklistError::SmallGroup(i + 1));
            }
            minority_groups.push(group);
        }
        if minority_groups.is_empty() {
            return Err(ChecklistError::EmptyLexicon("minorities".into()));
        }
        Ok(Self {
            locations: non_empty("locations", dedup(lines(locations)))?,
            minority_groups,
            loaded_adjectives: non_empty("loaded_adjectives", dedup(lines(adjectives)))?,
            loaded_adverbs: non_empty("loaded_adverbs", dedup(lines(adverbs)))?,
        })
    }

    /// Load `locations.txt`, `minorities.txt`, `loaded_adjectives.txt` and
    /// `loaded_adverbs.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| read_text(&dir.join(name));
        Ok(Self::parse(
            &read("locations.txt")?,
            &read("minorities.txt")?,
            &read("loaded_adjectives.txt")?,
            &read("loaded_adverbs.txt")?,
        )?)
    }
}

impl Default for Lexicons {
    /// The lists shipped in `lexicons/`.
    fn default() -> Self {
        Self::parse(LOCATIONS, MINORITIES, ADJECTIVES, ADVERBS).expect("shipped lexicons are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lists_are_valid() {
        let lex = Lexicons::default();
        assert!(lex.locations.contains(&"Hawaii".to_string()));
        assert!(lex.locations.contains(&"U.S.".to_string()));
        assert!(lex.minority_groups.iter().any(|g| g.contains(&"Buddha".to_string()) && g.contains(&"Christ".to_string())));
        assert!(lex.loaded_adverbs.contains(&"shockingly".to_string()));
        assert!(lex.loaded_adjectives.contains(&"outrageous".to_string()));
    }

    #[test]
    fn parse_rules() {
        let lex = Lexicons::parse("A\nA\n# note\nB\n", "x, y, x\n", "bad", "badly").unwrap();
        assert_eq!(lex.locations, ["A", "B"]);
        assert_eq!(lex.minority_groups, [vec!["x".to_string(), "y".to_string()]]);
        assert_eq!(Lexicons::parse("", "x, y", "a", "b"), Err(ChecklistError::EmptyLexicon("locations".into())));
        assert_eq!(Lexicons::parse("A", "x, x", "a", "b"), Err(ChecklistError::SmallGroup(1)));
        assert_eq!(Lexicons::parse("A", "x, y", "a", "\n"), Err(ChecklistError::EmptyLexicon("loaded_adverbs".into())));
    }
}
