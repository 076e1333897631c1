use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnnotateError, AnnotationRecord, ParsedLabel};
use crate::labels::BiasLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotePolicy {
    /// Any inconclusive vote excludes the sentence.
    #[default]
    ExcludeOnInconclusive,
    /// Majority over decisive votes only; equal counts are a tie.
    VoteDecisive,
}

impl std::str::FromStr for VotePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exclude_on_inconclusive" | "exclude" => Ok(VotePolicy::ExcludeOnInconclusive),
            "vote_decisive" | "decisive" => Ok(VotePolicy::VoteDecisive),
            other => Err(format!("unknown vote policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcludedReason {
    HasInconclusive,
    Tie,
}

/// Per-sentence vote tally. `final_label` is present iff `excluded_reason`
/// is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub sentence_id: String,
    pub votes: BTreeMap<String, ParsedLabel>,
    #[serde(rename = "final")]
    pub final_label: Option<BiasLabel>,
    pub excluded_reason: Option<ExcludedReason>,
}

/// Aggregate one vote per model for a single sentence.
pub fn majority_vote(records: &[AnnotationRecord], policy: VotePolicy) -> Result<EnsembleResult, AnnotateError> {
    let Some(first) = records.first() else {
        return Err(AnnotateError::EmptyPanel);
    };
    if let Some(other) = records.iter().find(|r| r.sentence_id != first.sentence_id) {
        return Err(AnnotateError::MixedSentences(first.sentence_id.clone(), other.sentence_id.clone()));
    }
    let votes: Vec<(String, ParsedLabel)> = records.iter().map(|r| (r.model_name.clone(), r.parsed)).collect();
    tally(&first.sentence_id, &votes, policy)
}

/// Vote aggregation over (model name, label) pairs.
pub fn tally(sentence_id: &str, votes: &[(String, ParsedLabel)], policy: VotePolicy) -> Result<EnsembleResult, AnnotateError> {
    if votes.is_empty() {
        return Err(AnnotateError::EmptyPanel);
    }
    if votes.len().is_multiple_of(2) {
        return Err(AnnotateError::EvenPanel(votes.len()));
    }
    let mut map = BTreeMap::new();
    for (model, label) in votes {
        if map.insert(model.clone(), *label).is_some() {
            return Err(AnnotateError::DuplicateModelVote(model.clone()));
        }
    }
    let count = |l: ParsedLabel| votes.iter().filter(|(_, v)| *v == l).count();
    let (biased, neutral, unsure) = (
        count(ParsedLabel::Biased),
        count(ParsedLabel::NotBiased),
        count(ParsedLabel::Inconclusive),
    );
    let (final_label, excluded_reason) = if policy == VotePolicy::ExcludeOnInconclusive && unsure > 0 {
        (None, Some(ExcludedReason::HasInconclusive))
    } else {
        match biased.cmp(&neutral) {
            std::cmp::Ordering::Greater => (Some(BiasLabel::Biased), None),
            std::cmp::Ordering::Less => (Some(BiasLabel::NotBiased), None),
            std::cmp::Ordering::Equal => (None, Some(ExcludedReason::Tie)),
        }
    };
    Ok(EnsembleResult {
        sentence_id: sentence_id.to_string(),
        votes: map,
        final_label,
        excluded_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model: &str, parsed: ParsedLabel) -> AnnotationRecord {
        AnnotationRecord {
            sentence_id: "s1".into(),
            model_name: model.into(),
            prompt_hash: "h".into(),
            raw_response: String::new(),
            parsed,
            latency_ms: 0,
        }
    }

    use ParsedLabel::{Biased as B, Inconclusive as I, NotBiased as N};

    #[test]
    fn two_of_three() {
        let r = majority_vote(&[rec("a", B), rec("b", B), rec("c", N)], VotePolicy::default()).unwrap();
        assert_eq!(r.final_label, Some(BiasLabel::Biased));
        assert_eq!(r.excluded_reason, None);
    }

    #[test]
    fn inconclusive_under_both_policies() {
        let records = [rec("a", B), rec("b", I), rec("c", B)];
        let r = majority_vote(&records, VotePolicy::ExcludeOnInconclusive).unwrap();
        assert_eq!((r.final_label, r.excluded_reason), (None, Some(ExcludedReason::HasInconclusive)));
        let r = majority_vote(&records, VotePolicy::VoteDecisive).unwrap();
        assert_eq!(r.final_label, Some(BiasLabel::Biased));
        let r = majority_vote(&[rec("a", B), rec("b", I), rec("c", N)], VotePolicy::VoteDecisive).unwrap();
        assert_eq!((r.final_label, r.excluded_reason), (None, Some(ExcludedReason::Tie)));
    }

    #[test]
    fn panel_errors() {
        assert_eq!(
            majority_vote(&[rec("a", B), rec("b", B)], VotePolicy::default()),
            Err(AnnotateError::EvenPanel(2))
        );
        assert_eq!(
            majority_vote(&[rec("a", B), rec("a", B), rec("c", N)], VotePolicy::default()),
            Err(AnnotateError::DuplicateModelVote("a".into()))
        );
        assert_eq!(majority_vote(&[], VotePolicy::default()), Err(AnnotateError::EmptyPanel));
        let mut other = rec("b", B);
        other.sentence_id = "s2".into();
        assert!(matches!(
            majority_vote(&[rec("a", B), other, rec("c", B)], VotePolicy::default()),
            Err(AnnotateError::MixedSentences(..))
        ));
    }

    #[test]
    fn json_shape() {
        let r = majority_vote(&[rec("a", B), rec("b", I), rec("c", B)], VotePolicy::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"sentence_id":"s1","votes":{"a":"BIASED","b":"?","c":"BIASED"},"final":null,"excluded_reason":"has_inconclusive"}"#
        );
    }
}
