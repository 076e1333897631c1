use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::labels::BiasLabel;

/// Discordant-pair totals below this use the exact binomial test.
pub const EXACT_BELOW: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McNemarMethod {
    ExactBinomial,
    ChiSquareCc,
}

/// `statistic` is |b - c| on the exact branch and the continuity-corrected
/// chi-square value otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub b: u64,
    pub c: u64,
    pub statistic: f64,
    pub p_value: f64,
    pub method: McNemarMethod,
}

/// Complementary error function, absolute error below 1e-13.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let pre = (-x * x).exp();
    if x < 3.0 {
        // erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (2n+1)!!; all terms positive.
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > sum * 1e-17 {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * pre * sum
    } else {
        // erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        pre / (std::f64::consts::PI.sqrt() * f)
    }
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_sf_1dof(stat: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    erfc((stat / 2.0).sqrt())
}

fn binomial_lower_tail_half(n: u64, k: u64) -> f64 {
    let mut coef: u128 = 1;
    let mut sum: u128 = 0;
    for i in 0..=k {
        if i > 0 {
            coef = coef * (n - i + 1) as u128 / i as u128;
        }
        sum += coef;
    }
    sum as f64 / (1u128 << n) as f64
}

/// Test from discordant counts: b = A right and B wrong, c = the reverse.
pub fn mcnemar_counts(b: u64, c: u64) -> Result<McNemarResult, MetricsError> {
    let n = b + c;
    if n == 0 {
        return Err(MetricsError::NoDisagreements);
    }
    let diff = b.abs_diff(c) as f64;
    if n < EXACT_BELOW {
        let p = (2.0 * binomial_lower_tail_half(n, b.min(c))).min(1.0);
        Ok(McNemarResult {
            b,
            c,
            statistic: diff,
            p_value: p,
            method: McNemarMethod::ExactBinomial,
        })
    } else {
        let stat = (diff - 1.0).max(0.0).powi(2) / n as f64;
        Ok(McNemarResult {
            b,
            c,
            statistic: stat,
            p_value: chi2_sf_1dof(stat).clamp(0.0, 1.0),
            method: McNemarMethod::ChiSquareCc,
        })
    }
}

pub fn mcnemar(preds_a: &[BiasLabel], preds_b: &[BiasLabel], golds: &[BiasLabel]) -> Result<McNemarResult, MetricsError> {
    if preds_a.len() != golds.len() {
        return Err(MetricsError::LengthMismatch(preds_a.len(), golds.len()));
    }
    if preds_b.len() != golds.len() {
        return Err(MetricsError::LengthMismatch(preds_b.len(), golds.len()));
    }
    let (mut b, mut c) = (0, 0);
    for ((pa, pb), g) in preds_a.iter().zip(preds_b).zip(golds) {
        match (pa == g, pb == g) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    mcnemar_counts(b, c)
}
