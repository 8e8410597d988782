//! Testing along the graph: critical constants with PFER control, the
//! parent-gated testing pass, and the self-consistent FDR procedures built
//! from them.

use super::{gels_run, BaseProcedure, GelsRun};
use crate::dag::{Dag, DagMetrics};
use crate::error::{Error, Result};
use crate::types::{CriticalConstants, PValues, RejectionSet, WeightFunction};

/// Which critical-constant formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantsMode {
    /// Leaf nodes get `min(lambda, beta / l)`; non-leaves get
    /// `min(lambda, beta / l) * l_i / (1 + lambda * l_i)`. Controls the PFER
    /// at `beta` under independence.
    PferLambda { lambda: f64 },
    /// [`ConstantsMode::PferLambda`] with `lambda = beta / l`.
    PferDefault,
    /// Plain Bonferroni constants `beta / m` at every node.
    Bonferroni,
}

/// Evaluates per-node critical constants for one of the supported formulas,
/// clamped into `[0, 1]`.
///
/// Requires flow-filled metrics for the PFER modes (`l_i` appears in the
/// formula) and at least one node.
pub fn dag_constants(
    metrics: &DagMetrics,
    beta: f64,
    mode: ConstantsMode,
) -> Result<CriticalConstants> {
    let m = metrics.families().len();
    if m == 0 {
        return Err(Error::EmptyDag);
    }
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::NonPositiveLevel { level: beta });
    }
    let thresholds = match mode {
        ConstantsMode::Bonferroni => vec![(beta / m as f64).clamp(0.0, 1.0); m],
        ConstantsMode::PferLambda { .. } | ConstantsMode::PferDefault => {
            let leaves = metrics.leaf_count() as f64;
            let lambda = match mode {
                ConstantsMode::PferLambda { lambda } => lambda,
                _ => beta / leaves,
            };
            if lambda <= 0.0 || !lambda.is_finite() {
                return Err(Error::NonPositiveLambda { lambda });
            }
            let cap = lambda.min(beta / leaves);
            (0..m)
                .map(|i| {
                    let value = if metrics.is_leaf(i) {
                        cap
                    } else {
                        let flow = metrics.leaf_flow(i);
                        cap * flow / (1.0 + lambda * flow)
                    };
                    value.clamp(0.0, 1.0)
                })
                .collect()
        }
    };
    CriticalConstants::new(thresholds)
}

/// Tests along the graph: in topological order, `H_i` is rejected iff every
/// parent is rejected and `P_i <= constants[i]`. The output is closed under
/// ancestors by construction.
pub fn dag_test(dag: &Dag, p: &PValues, constants: &CriticalConstants) -> Result<RejectionSet> {
    let m = dag.m();
    if p.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: p.len(),
        });
    }
    if constants.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: constants.len(),
        });
    }
    let mut rejected = vec![false; m];
    for &i in dag.topo_order() {
        rejected[i] =
            dag.parents(i).iter().all(|&parent| rejected[parent]) && p.get(i) <= constants.get(i);
    }
    Ok(RejectionSet::from_mask(rejected))
}

/// The PFER-controlling DAG rule as a level-parameterized base: thresholds
/// are re-evaluated at each level with `lambda` held fixed.
#[derive(Debug, Clone)]
pub struct DagPferBase<'a> {
    dag: &'a Dag,
    metrics: &'a DagMetrics,
    p: &'a PValues,
    lambda: f64,
}

impl<'a> DagPferBase<'a> {
    pub fn new(dag: &'a Dag, metrics: &'a DagMetrics, p: &'a PValues, lambda: f64) -> Result<Self> {
        if dag.m() == 0 {
            return Err(Error::EmptyDag);
        }
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::NonPositiveLambda { lambda });
        }
        if p.len() != dag.m() {
            return Err(Error::LengthMismatch {
                expected: dag.m(),
                actual: p.len(),
            });
        }
        Ok(Self {
            dag,
            metrics,
            p,
            lambda,
        })
    }
}

impl BaseProcedure for DagPferBase<'_> {
    fn m(&self) -> usize {
        self.dag.m()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let constants = dag_constants(
            self.metrics,
            beta,
            ConstantsMode::PferLambda {
                lambda: self.lambda,
            },
        )
        .expect("parameters validated at construction");
        dag_test(self.dag, self.p, &constants).expect("lengths validated at construction")
    }
}

/// The DAG rule with Bonferroni constants `beta / m` as a base.
#[derive(Debug, Clone)]
pub struct DagBonferroniBase<'a> {
    dag: &'a Dag,
    p: &'a PValues,
}

impl<'a> DagBonferroniBase<'a> {
    pub fn new(dag: &'a Dag, p: &'a PValues) -> Result<Self> {
        if p.len() != dag.m() {
            return Err(Error::LengthMismatch {
                expected: dag.m(),
                actual: p.len(),
            });
        }
        Ok(Self { dag, p })
    }
}

impl BaseProcedure for DagBonferroniBase<'_> {
    fn m(&self) -> usize {
        self.dag.m()
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let m = self.dag.m();
        let threshold = (beta / m as f64).clamp(0.0, 1.0);
        let constants =
            CriticalConstants::new(vec![threshold; m]).expect("clamped threshold is in range");
        dag_test(self.dag, self.p, &constants).expect("lengths validated at construction")
    }
}

/// FDR control along the graph: GELS over the PFER-controlling DAG base with
/// the FDR weight, so `H_i`'s realized threshold is
/// `min(lambda, R * alpha / l) * l_i / (1 + lambda * l_i)` for non-leaves and
/// `min(lambda, R * alpha / l)` for leaves.
///
/// Values of `lambda` close to `alpha` work well in practice, with
/// `lambda = 2 * alpha` a sensible default.
pub fn dag_gels(
    dag: &Dag,
    metrics: &DagMetrics,
    p: &PValues,
    alpha: f64,
    lambda: f64,
) -> Result<GelsRun> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    if dag.m() == 0 {
        if !p.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 0,
                actual: p.len(),
            });
        }
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::NonPositiveLambda { lambda });
        }
        return Ok(GelsRun {
            rejections: RejectionSet::none(0),
            level: alpha,
        });
    }
    let base = DagPferBase::new(dag, metrics, p, lambda)?;
    gels_run(&base, &WeightFunction::Fdr, alpha)
}

/// The structure-preserving BH variant: GELS over the DAG rule with
/// Bonferroni constants and the FDR weight. Rejects a subset of what plain
/// BH rejects, since parent gating can only remove rejections.
pub fn dag_bh(dag: &Dag, p: &PValues, alpha: f64) -> Result<GelsRun> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    if dag.m() == 0 {
        if !p.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 0,
                actual: p.len(),
            });
        }
        return Ok(GelsRun {
            rejections: RejectionSet::none(0),
            level: alpha,
        });
    }
    let base = DagBonferroniBase::new(dag, p)?;
    gels_run(&base, &WeightFunction::Fdr, alpha)
}
