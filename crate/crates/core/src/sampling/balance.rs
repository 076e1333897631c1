use std::collections::BTreeMap;

use rand::seq::index;

use super::{cell_name, LabeledSentence, SamplingError, WeakLabeledSentence};
use crate::labels::{BiasLabel, PoliticalLeaning};
use crate::seed::scoped_rng;

/// Sizes of the ten (leaning × weak label) cells.
pub fn weak_cell_counts(pool: &[WeakLabeledSentence]) -> BTreeMap<(PoliticalLeaning, BiasLabel), usize> {
    let mut counts: BTreeMap<_, usize> = PoliticalLeaning::ALL
        .iter()
        .flat_map(|&l| BiasLabel::ALL.iter().map(move |&b| ((l, b), 0)))
        .collect();
    for w in pool {
        *counts.entry((w.sentence.leaning, w.weak_label)).or_default() += 1;
    }
    counts
}

/// Draw `k` of `items` uniformly without replacement. Items are first put in
/// sentence-id order so the draw does not depend on input order.
fn draw<T: Clone>(mut items: Vec<T>, k: usize, key: impl Fn(&T) -> &str, seed: u64, scope: &str) -> Vec<T> {
    items.sort_by(|a, b| key(a).cmp(key(b)));
    if k >= items.len() {
        return items;
    }
    let mut rng = scoped_rng(seed, scope);
    let mut picked = index::sample(&mut rng, items.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| items[i].clone()).collect()
}

/// Pre-annotation balancing: exactly `quota` sentences from each of the ten
/// (leaning × weak label) cells. Without an explicit quota the smallest cell
/// sets it. Output is sorted by sentence id.
pub fn presample_balanced(
    pool: &[WeakLabeledSentence],
    quota: Option<usize>,
    seed: u64,
) -> Result<Vec<WeakLabeledSentence>, SamplingError> {
    let mut cells: BTreeMap<(PoliticalLeaning, BiasLabel), Vec<WeakLabeledSentence>> = PoliticalLeaning::ALL
        .iter()
        .flat_map(|&l| BiasLabel::ALL.iter().map(move |&b| ((l, b), Vec::new())))
        .collect();
    for w in pool {
        cells.entry((w.sentence.leaning, w.weak_label)).or_default().push(w.clone());
    }
    let quota = match quota {
        Some(q) => {
            for ((l, b), items) in &cells {
                if items.len() < q {
                    return Err(SamplingError::CellUnderflow {
                        cell: cell_name(*l, *b),
                        available: items.len(),
                        requested: q,
                    });
                }
            }
            q
        }
        None => cells.values().map(Vec::len).min().unwrap_or(0),
    };
    let mut out = Vec::with_capacity(quota * cells.len());
    for ((l, b), items) in cells {
        let scope = format!("presample/{}", cell_name(l, b));
        out.extend(draw(items, quota, |w| w.sentence.sentence_id.as_str(), seed, &scope));
    }
    out.sort_by(|a, b| a.sentence.sentence_id.cmp(&b.sentence.sentence_id));
    Ok(out)
}

/// Post-annotation balancing: within each leaning keep equally many Biased
/// and NotBiased sentences, downsampling the majority side.
pub fn postsample_balanced(annotated: &[LabeledSentence], seed: u64) -> Vec<LabeledSentence> {
    let mut out = Vec::new();
    for leaning in PoliticalLeaning::ALL {
        let side = |label: BiasLabel| -> Vec<LabeledSentence> {
            annotated
                .iter()
                .filter(|s| s.sentence.leaning == leaning && s.label == label)
                .cloned()
                .collect()
        };
        let biased = side(BiasLabel::Biased);
        let neutral = side(BiasLabel::NotBiased);
        let keep = biased.len().min(neutral.len());
        for (label, items) in [(BiasLabel::Biased, biased), (BiasLabel::NotBiased, neutral)] {
            let scope = format!("postsample/{}", cell_name(leaning, label));
            out.extend(draw(items, keep, |s| s.sentence.sentence_id.as_str(), seed, &scope));
        }
    }
    out.sort_by(|a, b| a.sentence.sentence_id.cmp(&b.sentence.sentence_id));
    out
}
