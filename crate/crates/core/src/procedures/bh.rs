//! The BH stepup family: plain, adaptive, weighted, and oracle variants.

use super::{adaptive_m0, stepup};
use crate::error::{Error, Result};
use crate::types::{CriticalConstants, PValues, RejectionSet};

/// Which member of the BH family to run.
#[derive(Debug, Clone, PartialEq)]
pub enum BhMode<'a> {
    /// Stepup with constants `i * alpha / m`.
    Plain,
    /// Stepup with constants `i * alpha / m0_hat(gamma)`.
    Adaptive { gamma: f64 },
    /// Rejects `H_i` iff `P_i / w_i <= R* alpha / m`, where `R*` is the
    /// stepup rank of the weighted p-values. Weights are rescaled to sum to
    /// `m`; a zero weight excludes its hypothesis.
    Weighted { weights: &'a [f64] },
    /// Stepup with constants `i * alpha / m0` for a user-supplied true-null
    /// count.
    Oracle { m0: f64 },
}

/// Runs the selected BH variant at level `alpha`.
pub fn bh_variant(p: &PValues, alpha: f64, mode: BhMode<'_>) -> Result<RejectionSet> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    let m = p.len();
    match mode {
        BhMode::Plain => stepup_with_denominator(p, alpha, m as f64),
        BhMode::Adaptive { gamma } => {
            let m0_hat = adaptive_m0(p, gamma)?;
            stepup_with_denominator(p, alpha, m0_hat)
        }
        BhMode::Oracle { m0 } => {
            if m0 <= 0.0 || !m0.is_finite() {
                return Err(Error::NonPositiveDenominator { denominator: m0 });
            }
            stepup_with_denominator(p, alpha, m0)
        }
        BhMode::Weighted { weights } => weighted_bh(p, alpha, weights),
    }
}

/// Stepup with constants `min(i * alpha / denominator, 1)`.
fn stepup_with_denominator(p: &PValues, alpha: f64, denominator: f64) -> Result<RejectionSet> {
    let m = p.len();
    if m == 0 {
        return Ok(RejectionSet::none(0));
    }
    let constants = CriticalConstants::new(
        (1..=m)
            .map(|i| (i as f64 * alpha / denominator).min(1.0))
            .collect(),
    )?;
    stepup(p, &constants)
}

fn weighted_bh(p: &PValues, alpha: f64, weights: &[f64]) -> Result<RejectionSet> {
    let m = p.len();
    if weights.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: weights.len(),
        });
    }
    if m == 0 {
        return Ok(RejectionSet::none(0));
    }
    let mut sum = 0.0;
    for (index, &weight) in weights.iter().enumerate() {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::NegativeWeight { index, weight });
        }
        sum += weight;
    }
    if sum <= 0.0 {
        return Err(Error::WeightNormalization {
            sum,
            expected: m as f64,
        });
    }
    let scale = m as f64 / sum;

    // Weighted p-values P_i / w_i with mean-one weights; zero weights push a
    // hypothesis beyond every threshold.
    let weighted: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(weights)
        .map(|(&v, &w)| {
            let w = w * scale;
            if w > 0.0 {
                v / w
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut sorted = weighted.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = (1..=m)
        .rev()
        .find(|&r| sorted[r - 1] <= r as f64 * alpha / m as f64)
        .unwrap_or(0);
    if rank == 0 {
        return Ok(RejectionSet::none(m));
    }
    let threshold = rank as f64 * alpha / m as f64;
    Ok(RejectionSet::from_mask(
        weighted.iter().map(|&q| q <= threshold).collect(),
    ))
}
