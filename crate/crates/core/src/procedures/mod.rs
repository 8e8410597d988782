//! Testing procedures: single-step bases, the stepup scheme, the
//! self-consistent GELS meta-procedure, and the DAG-aware procedures built on
//! top of them.

mod bh;
mod bonferroni;
mod dag_proc;
mod kfdr;

pub use bh::{bh_variant, BhMode};
pub use bonferroni::{
    adaptive_bonferroni, adaptive_m0, bonferroni, weighted_bonferroni, AdaptiveBonferroniBase,
    BonferroniBase, WeightedBonferroniBase,
};
pub use dag_proc::{
    dag_bh, dag_constants, dag_gels, dag_test, ConstantsMode, DagBonferroniBase, DagPferBase,
};
pub use kfdr::{kfdr_single_step, kfdr_stepup, kfdr_threshold, KfdrSingleStepBase};

use crate::error::{Error, Result};
use crate::types::{CriticalConstants, PValues, RejectionSet, WeightFunction};

/// A level-parameterized rejection rule over fixed p-values (and a fixed
/// graph where applicable).
///
/// Implementations must be alpha-monotone: the rejection count may never
/// decrease as the level grows. [`gels_run`] verifies this along its descent
/// and fails loudly on a violation.
pub trait BaseProcedure {
    /// Number of hypotheses under test.
    fn m(&self) -> usize;

    /// Applies the procedure at level `beta > 0`.
    fn reject_at(&self, beta: f64) -> RejectionSet;
}

/// A stepup procedure with non-decreasing critical constants.
///
/// `R` is the largest rank `r` with `P_(r) <= constants[r-1]` (zero if none),
/// and every hypothesis with `P_i <= constants[R-1]` is rejected. Rejection
/// is decided by threshold comparison, never by sort position, so tied
/// p-values need no special handling.
pub fn stepup(p: &PValues, constants: &CriticalConstants) -> Result<RejectionSet> {
    let m = p.len();
    if constants.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: constants.len(),
        });
    }
    for index in 1..m {
        if constants.get(index) < constants.get(index - 1) {
            return Err(Error::NonMonotoneConstants { index });
        }
    }

    let mut sorted: Vec<f64> = p.as_slice().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = (1..=m)
        .rev()
        .find(|&r| sorted[r - 1] <= constants.get(r - 1))
        .unwrap_or(0);
    if rank == 0 {
        return Ok(RejectionSet::none(m));
    }
    let threshold = constants.get(rank - 1);
    Ok(RejectionSet::from_mask(
        p.as_slice().iter().map(|&v| v <= threshold).collect(),
    ))
}

/// Outcome of a GELS run: the rejection set produced by the base procedure at
/// the self-consistent level `alpha / W(R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GelsRun {
    /// Rejections of the base procedure at [`GelsRun::level`]; its count is
    /// the self-consistent `R`.
    pub rejections: RejectionSet,
    /// The realized level `alpha / W(R)`.
    pub level: f64,
}

impl GelsRun {
    /// The self-consistent rejection count `R`.
    pub fn r(&self) -> usize {
        self.rejections.count()
    }
}

/// Runs the GELS meta-procedure: apply `base` at the self-consistent level
/// `alpha / W(R)`.
///
/// `R` is found by descent: start at `r = m`, repeatedly re-apply the base at
/// level `alpha / W(r)`, and stop at the fixed point. For an alpha-monotone
/// base the iterates strictly decrease until they stabilize, and the fixed
/// point equals the largest `r` with `r <= R_base(alpha / W(r))`; a rising
/// iterate is reported as [`Error::NonMonotoneBase`].
pub fn gels_run(base: &dyn BaseProcedure, weight: &WeightFunction, alpha: f64) -> Result<GelsRun> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    let m = base.m();
    weight.check_domain(m)?;

    let mut r = m;
    loop {
        let level = alpha / weight.eval(r);
        let rejections = base.reject_at(level);
        let next = rejections.count();
        if next == r {
            return Ok(GelsRun { rejections, level });
        }
        if next > r {
            return Err(Error::NonMonotoneBase {
                previous: r,
                current: next,
            });
        }
        r = next;
    }
}
