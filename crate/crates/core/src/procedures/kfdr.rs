//! Procedures targeting the generalized (k-)FDR.

use super::{stepup, BaseProcedure};
use crate::error::{Error, Result};
use crate::types::{CriticalConstants, PValues, RejectionSet};
use statrs::function::gamma::ln_gamma;

/// The single-step threshold `t(beta) = [(k-1)! * beta / C(m, k)]^(1/k)`,
/// evaluated in log space so binomial coefficients at large `m` cannot
/// overflow, then clamped into `[0, 1]`.
pub fn kfdr_threshold(m: usize, k: usize, beta: f64) -> f64 {
    debug_assert!(k >= 1 && k <= m && beta > 0.0);
    let ln_choose =
        ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0);
    let ln_t = (ln_gamma(k as f64) + beta.ln() - ln_choose) / k as f64;
    ln_t.exp().clamp(0.0, 1.0)
}

/// Single-step procedure rejecting every `P_i <= t(beta)`; collapses to
/// Bonferroni at `k = 1`.
pub fn kfdr_single_step(p: &PValues, k: usize, beta: f64) -> Result<RejectionSet> {
    let base = KfdrSingleStepBase::new(p, k)?;
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::NonPositiveLevel { level: beta });
    }
    Ok(base.reject_at(beta))
}

/// Stepup procedure with constants `t(max(k, i) * alpha)`.
pub fn kfdr_stepup(p: &PValues, k: usize, alpha: f64) -> Result<RejectionSet> {
    let m = p.len();
    if k < 1 || k > m {
        return Err(Error::KOutOfRange { k, m });
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    let constants = CriticalConstants::new(
        (1..=m)
            .map(|i| kfdr_threshold(m, k, k.max(i) as f64 * alpha))
            .collect(),
    )?;
    stepup(p, &constants)
}

/// The k-FDR single-step rule as a level-parameterized base.
#[derive(Debug, Clone)]
pub struct KfdrSingleStepBase<'a> {
    p: &'a PValues,
    k: usize,
}

impl<'a> KfdrSingleStepBase<'a> {
    pub fn new(p: &'a PValues, k: usize) -> Result<Self> {
        if k < 1 || k > p.len() {
            return Err(Error::KOutOfRange { k, m: p.len() });
        }
        Ok(Self { p, k })
    }
}

impl BaseProcedure for KfdrSingleStepBase<'_> {
    fn m(&self) -> usize {
        self.p.len()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let threshold = kfdr_threshold(self.p.len(), self.k, beta);
        RejectionSet::from_mask(self.p.as_slice().iter().map(|&v| v <= threshold).collect())
    }
}
