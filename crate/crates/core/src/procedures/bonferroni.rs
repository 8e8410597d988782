//! Single-step threshold procedures: plain, weighted, oracle, and adaptive
//! Bonferroni.

use super::BaseProcedure;
use crate::error::{Error, Result};
use crate::types::{PValues, RejectionSet};

/// Tolerance for the weighted-procedure normalization `sum(w) = m`.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Rejects every `H_i` with `P_i <= alpha / denominator`.
///
/// `denominator = m` gives the conventional Bonferroni procedure and
/// `denominator = m0` the oracle variant.
pub fn bonferroni(p: &PValues, alpha: f64, denominator: f64) -> Result<RejectionSet> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(Error::NonPositiveDenominator { denominator });
    }
    let threshold = alpha / denominator;
    Ok(RejectionSet::from_mask(
        p.as_slice().iter().map(|&v| v <= threshold).collect(),
    ))
}

/// Validates weights for the weighted procedures: non-negative, finite, and
/// summing to `m` within tolerance.
fn validate_weights(weights: &[f64], m: usize) -> Result<()> {
    if weights.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: weights.len(),
        });
    }
    let mut sum = 0.0;
    for (index, &weight) in weights.iter().enumerate() {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::NegativeWeight { index, weight });
        }
        sum += weight;
    }
    if m > 0 && (sum - m as f64).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::WeightNormalization {
            sum,
            expected: m as f64,
        });
    }
    Ok(())
}

/// Weighted Bonferroni: rejects `H_i` iff `P_i <= w_i * beta / m`.
///
/// Weights must be non-negative and sum to `m` (mean one), so unit weights
/// reduce to the plain procedure. A zero weight removes its hypothesis from
/// consideration entirely.
pub fn weighted_bonferroni(p: &PValues, weights: &[f64], beta: f64) -> Result<RejectionSet> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::NonPositiveLevel { level: beta });
    }
    validate_weights(weights, p.len())?;
    let m = p.len() as f64;
    Ok(RejectionSet::from_mask(
        p.as_slice()
            .iter()
            .zip(weights)
            .map(|(&v, &w)| w > 0.0 && v <= w * beta / m)
            .collect(),
    ))
}

/// The true-null count estimator `(#{P_i > gamma} + 1) / (1 - gamma)`.
pub fn adaptive_m0(p: &PValues, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange { gamma });
    }
    let above = p.as_slice().iter().filter(|&&v| v > gamma).count();
    Ok((above as f64 + 1.0) / (1.0 - gamma))
}

/// Adaptive Bonferroni: estimates the true-null count once from the nominal
/// p-values, then rejects `H_i` iff `P_i <= beta / m0_hat`.
pub fn adaptive_bonferroni(p: &PValues, gamma: f64, beta: f64) -> Result<RejectionSet> {
    let m0_hat = adaptive_m0(p, gamma)?;
    bonferroni(p, beta, m0_hat)
}

/// Bonferroni with a fixed denominator as a level-parameterized base.
#[derive(Debug, Clone)]
pub struct BonferroniBase<'a> {
    p: &'a PValues,
    denominator: f64,
}

impl<'a> BonferroniBase<'a> {
    pub fn new(p: &'a PValues, denominator: f64) -> Result<Self> {
        if denominator <= 0.0 || !denominator.is_finite() {
            return Err(Error::NonPositiveDenominator { denominator });
        }
        Ok(Self { p, denominator })
    }

    /// The conventional base with denominator `m` (or 1 for the empty case,
    /// where the denominator never matters).
    pub fn conventional(p: &'a PValues) -> Self {
        let denominator = if p.is_empty() { 1.0 } else { p.len() as f64 };
        Self { p, denominator }
    }
}

impl BaseProcedure for BonferroniBase<'_> {
    fn m(&self) -> usize {
        self.p.len()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let threshold = beta / self.denominator;
        RejectionSet::from_mask(self.p.as_slice().iter().map(|&v| v <= threshold).collect())
    }
}

/// Weighted Bonferroni as a level-parameterized base; weights are validated
/// once at construction.
#[derive(Debug, Clone)]
pub struct WeightedBonferroniBase<'a> {
    p: &'a PValues,
    weights: Vec<f64>,
}

impl<'a> WeightedBonferroniBase<'a> {
    pub fn new(p: &'a PValues, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, p.len())?;
        Ok(Self { p, weights })
    }
}

impl BaseProcedure for WeightedBonferroniBase<'_> {
    fn m(&self) -> usize {
        self.p.len()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let m = self.p.len() as f64;
        RejectionSet::from_mask(
            self.p
                .as_slice()
                .iter()
                .zip(&self.weights)
                .map(|(&v, &w)| w > 0.0 && v <= w * beta / m)
                .collect(),
        )
    }
}

/// Adaptive Bonferroni as a base: the true-null estimate is frozen at the
/// nominal p-values, so only the threshold numerator scales with the level.
#[derive(Debug, Clone)]
pub struct AdaptiveBonferroniBase<'a> {
    p: &'a PValues,
    m0_hat: f64,
}

impl<'a> AdaptiveBonferroniBase<'a> {
    pub fn new(p: &'a PValues, gamma: f64) -> Result<Self> {
        let m0_hat = adaptive_m0(p, gamma)?;
        Ok(Self { p, m0_hat })
    }

    /// The frozen estimate `m0_hat`.
    pub fn m0_hat(&self) -> f64 {
        self.m0_hat
    }
}

impl BaseProcedure for AdaptiveBonferroniBase<'_> {
    fn m(&self) -> usize {
        self.p.len()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let threshold = beta / self.m0_hat;
        RejectionSet::from_mask(self.p.as_slice().iter().map(|&v| v <= threshold).collect())
    }
}
