use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{cell_name, DatasetItem, LabeledDataset, LabeledSentence, SamplingError, SplitTag};
use crate::seed::scoped_rng;

/// Train/dev/test proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios(pub [f64; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([0.7, 0.15, 0.15])
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.0.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SamplingError::InvalidRatios(format!("{:?}", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SamplingError::InvalidRatios(format!("sum is {sum}")));
        }
        Ok(())
    }
}

impl std::str::FromStr for SplitRatios {
    type Err = SamplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SamplingError::InvalidRatios(format!("{s:?}: {e}")))?;
        let arr: [f64; 3] = parts
            .try_into()
            .map_err(|_| SamplingError::InvalidRatios(format!("{s:?}: expected three values")))?;
        let r = SplitRatios(arr);
        r.validate()?;
        Ok(r)
    }
}

/// Largest-remainder apportionment of `n` items. Equal remainders go to the
/// earlier slot (train, then dev, then test).
pub fn largest_remainder(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    let mut fracs = [0f64; 3];
    for i in 0..3 {
        // guard against 6.9999999 style representation error
        let floor = (quotas[i] + 1e-9).floor();
        counts[i] = floor as usize;
        fracs[i] = (quotas[i] - floor).max(0.0);
    }
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| fracs[b].partial_cmp(&fracs[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    for &slot in order.iter().take(n.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

/// Stratified split by (leaning × label). Each stratum is ordered by sentence
/// id, shuffled with a stratum-scoped seed, then cut by largest remainder.
pub fn split(items: &[LabeledSentence], ratios: SplitRatios, seed: u64) -> Result<LabeledDataset, SamplingError> {
    ratios.validate()?;
    if items.is_empty() {
        return Err(SamplingError::EmptyDataset);
    }
    let mut strata: BTreeMap<_, Vec<&LabeledSentence>> = BTreeMap::new();
    for it in items {
        strata.entry((it.sentence.leaning, it.label)).or_default().push(it);
    }
    let mut out = Vec::with_capacity(items.len());
    for ((leaning, label), mut members) in strata {
        members.sort_by(|a, b| a.sentence.sentence_id.cmp(&b.sentence.sentence_id));
        let mut rng = scoped_rng(seed, &format!("split/{}", cell_name(leaning, label)));
        members.shuffle(&mut rng);
        let counts = largest_remainder(members.len(), &ratios.0);
        let mut cursor = members.into_iter();
        for (tag, count) in SplitTag::ALL.into_iter().zip(counts) {
            for m in cursor.by_ref().take(count) {
                out.push(DatasetItem {
                    item: m.clone(),
                    split: tag,
                });
            }
        }
    }
    out.sort_by(|a, b| a.item.sentence.sentence_id.cmp(&b.item.sentence.sentence_id));
    Ok(LabeledDataset { items: out })
}
