use serde::{Deserialize, Serialize};

use crate::labels::PoliticalLeaning;

/// Cut points mapping a signed AdFontes bias score onto five leanings.
///
/// `b <= left_max` is Left, `left_max < b <= lean_left_max` LeanLeft,
/// `lean_left_max < b < lean_right_min` Center, `lean_right_min <= b < right_min`
/// LeanRight and `b >= right_min` Right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdFontesThresholds {
    pub left_max: f64,
    pub lean_left_max: f64,
    pub lean_right_min: f64,
    pub right_min: f64,
}

impl Default for AdFontesThresholds {
    fn default() -> Self {
        Self {
            left_max: -18.0,
            lean_left_max: -6.0,
            lean_right_min: 6.0,
            right_min: 18.0,
        }
    }
}

impl AdFontesThresholds {
    pub fn map(&self, bias: f64) -> Option<PoliticalLeaning> {
        if !bias.is_finite() {
            return None;
        }
        Some(if bias <= self.left_max {
            PoliticalLeaning::Left
        } else if bias <= self.lean_left_max {
            PoliticalLeaning::LeanLeft
        } else if bias < self.lean_right_min {
            PoliticalLeaning::Center
        } else if bias < self.right_min {
            PoliticalLeaning::LeanRight
        } else {
            PoliticalLeaning::Right
        })
    }
}

/// Map an AllSides category string (case-insensitive) to a leaning.
pub fn parse_allsides(raw: &str) -> Option<PoliticalLeaning> {
    let norm: String = raw
        .trim()
        .chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_'))
        .map(|c| c.to_ascii_lowercase())
        .collect();
    match norm.as_str() {
        "left" => Some(PoliticalLeaning::Left),
        "leanleft" | "leansleft" => Some(PoliticalLeaning::LeanLeft),
        "center" | "centre" => Some(PoliticalLeaning::Center),
        "leanright" | "leansright" => Some(PoliticalLeaning::LeanRight),
        "right" => Some(PoliticalLeaning::Right),
        _ => None,
    }
}

/// Shared leaning when both platforms agree exactly, otherwise `None`.
pub fn unify_ratings(allsides_raw: &str, adfontes_bias: f64) -> Option<PoliticalLeaning> {
    unify_ratings_with(allsides_raw, adfontes_bias, &AdFontesThresholds::default())
}

pub fn unify_ratings_with(
    allsides_raw: &str,
    adfontes_bias: f64,
    thresholds: &AdFontesThresholds,
) -> Option<PoliticalLeaning> {
    let a = parse_allsides(allsides_raw)?;
    let b = thresholds.map(adfontes_bias)?;
    (a == b).then_some(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spot_values() {
        assert_eq!(unify_ratings("Lean Left", -10.0), Some(PoliticalLeaning::LeanLeft));
        assert_eq!(unify_ratings("Center", 0.0), Some(PoliticalLeaning::Center));
        assert_eq!(unify_ratings("Left", 20.0), None);
        assert_eq!(unify_ratings("Mixed", 0.0), None);
        assert_eq!(unify_ratings("center", f64::NAN), None);
    }

    #[test]
    fn threshold_edges() {
        let t = AdFontesThresholds::default();
        assert_eq!(t.map(-18.0), Some(PoliticalLeaning::Left));
        assert_eq!(t.map(-17.9), Some(PoliticalLeaning::LeanLeft));
        assert_eq!(t.map(-6.0), Some(PoliticalLeaning::LeanLeft));
        assert_eq!(t.map(-5.9), Some(PoliticalLeaning::Center));
        assert_eq!(t.map(5.9), Some(PoliticalLeaning::Center));
        assert_eq!(t.map(6.0), Some(PoliticalLeaning::LeanRight));
        assert_eq!(t.map(18.0), Some(PoliticalLeaning::Right));
    }

    proptest! {
        #[test]
        fn mirrored_input_gives_mirrored_output(idx in 0usize..5, bias in -40.0f64..40.0) {
            let names = ["Left", "Lean Left", "Center", "Lean Right", "Right"];
            let leaning = PoliticalLeaning::ALL[idx];
            let mirrored_name = names[4 - idx];
            let direct = unify_ratings(names[idx], bias);
            let mirrored = unify_ratings(mirrored_name, -bias);
            prop_assert_eq!(direct.map(|l| l.mirrored()), mirrored);
            if let Some(l) = direct {
                prop_assert_eq!(l, leaning);
            }
        }
    }
}
