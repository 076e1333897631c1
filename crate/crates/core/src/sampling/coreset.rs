use rand::Rng;

use super::SamplingError;
use crate::seed::scoped_rng;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Farthest-point-first selection of `m` of `n` points starting at `first`.
/// Returns indices in selection order; distance ties go to the lowest index.
pub fn k_center_greedy(n: usize, m: usize, first: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let mut selected = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut order = Vec::with_capacity(m);
    let mut next = first;
    loop {
        selected[next] = true;
        order.push(next);
        if order.len() == m.min(n) {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if selected[i] {
                continue;
            }
            let d = dist(i, next);
            if d < nearest[i] {
                nearest[i] = d;
            }
            if best.is_none_or(|(_, bd)| nearest[i] > bd) {
                best = Some((i, nearest[i]));
            }
        }
        next = best.expect("unselected point remains").0;
    }
    order
}

/// Max distance from any point to its nearest center.
pub fn covering_radius(n: usize, centers: &[usize], dist: impl Fn(usize, usize) -> f64) -> f64 {
    (0..n)
        .map(|i| centers.iter().map(|&c| dist(i, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// k-center greedy coreset over dense feature vectors under Euclidean
/// distance, with a seeded first center.
pub fn coreset_select(features: &[Vec<f64>], m: usize, seed: u64) -> Result<Vec<usize>, SamplingError> {
    let n = features.len();
    if m > n {
        return Err(SamplingError::SizeExceedsDataset {
            requested: m,
            available: n,
        });
    }
    if let Some(first) = features.first() {
        if features.iter().any(|f| f.len() != first.len()) {
            return Err(SamplingError::DimensionMismatch);
        }
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let start = scoped_rng(seed, "coreset").random_range(0..n);
    Ok(k_center_greedy(n, m, start, |i, j| euclidean(&features[i], &features[j])))
}
