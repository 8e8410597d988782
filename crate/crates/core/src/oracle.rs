//! Independent brute-force references used to validate the fast paths:
//! an exhaustive scan for the self-consistent rejection count, an exact
//! rational evaluation of the flow recursion, the proof-side coefficient
//! bound, and the closed-form FDR of the two-hypothesis cascade that breaks
//! the local error-rate condition.
//!
//! Everything here favors clarity over speed; the oracles are quadratic or
//! worse and meant for inputs of a few hundred nodes at most.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dag::{Dag, DagMetrics};
use crate::error::{Error, Result};
use crate::procedures::BaseProcedure;
use crate::types::{CriticalConstants, PValues, RejectionSet, WeightFunction};

/// Literal maximum of `{r in 0..=m : r <= R_base(alpha / W(r))}`, found by
/// evaluating the base at all `m + 1` candidate levels. The fast descent must
/// agree with this scan on every input.
pub fn gels_r_scan(base: &dyn BaseProcedure, weight: &WeightFunction, alpha: f64) -> Result<usize> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveLevel { level: alpha });
    }
    let m = base.m();
    weight.check_domain(m)?;
    Ok((0..=m)
        .filter(|&r| r <= base.reject_at(alpha / weight.eval(r)).count())
        .max()
        .unwrap_or(0))
}

/// Exact flow weights, computed by direct memoized recursion of the defining
/// cases in arbitrary-precision rational arithmetic.
///
/// Ancestor sets are rederived here with a plain DFS so the oracle shares no
/// code with the float implementation it cross-checks.
#[derive(Debug, Clone)]
pub struct ExactFlow {
    columns: Vec<BTreeMap<usize, BigRational>>,
}

impl ExactFlow {
    /// `s_{i,j}` as an exact rational (zero when `i` is not an ancestor of `j`).
    pub fn s(&self, i: usize, j: usize) -> BigRational {
        self.columns[j]
            .get(&i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Exact leaf flows `l_i`.
    pub fn leaf_flows(&self, dag: &Dag) -> Vec<BigRational> {
        let m = dag.m();
        let mut flows = vec![BigRational::zero(); m];
        for j in 0..m {
            if dag.children(j).is_empty() {
                for (&i, value) in &self.columns[j] {
                    flows[i] += value;
                }
            }
        }
        flows
    }
}

/// Runs the exact recursion for every pair with `i` an ancestor of `j`.
pub fn flow_recursive(dag: &Dag) -> ExactFlow {
    let m = dag.m();

    // Ancestor sets by DFS over parent links, independent of compute_metrics.
    let mut ancestor_sets: Vec<Vec<usize>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut seen = vec![false; m];
        let mut stack = vec![j];
        while let Some(node) = stack.pop() {
            if seen[node] {
                continue;
            }
            seen[node] = true;
            stack.extend_from_slice(dag.parents(node));
        }
        ancestor_sets.push((0..m).filter(|&i| seen[i]).collect());
    }

    let mut columns: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); m];
    let mut done = vec![false; m];

    // Memoized evaluation: a column only needs its parents' columns, so an
    // explicit dependency-first stack replaces recursion.
    for start in 0..m {
        let mut stack = vec![start];
        while let Some(&j) = stack.last() {
            if done[j] {
                stack.pop();
                continue;
            }
            let pending: Vec<usize> = dag
                .parents(j)
                .iter()
                .copied()
                .filter(|&k| !done[k])
                .collect();
            if !pending.is_empty() {
                stack.extend(pending);
                continue;
            }
            stack.pop();
            let share = BigRational::new(BigInt::one(), BigInt::from(dag.parents(j).len().max(1)));
            let mut column = BTreeMap::new();
            for &i in &ancestor_sets[j] {
                let value = if i == j {
                    BigRational::one()
                } else {
                    let mut sum = BigRational::zero();
                    for &k in dag.parents(j) {
                        if let Some(v) = columns[k].get(&i) {
                            sum += v * &share;
                        }
                    }
                    sum
                };
                column.insert(i, value);
            }
            columns[j] = column;
            done[j] = true;
        }
    }

    ExactFlow { columns }
}

/// The per-node coefficients from the PFER proof: zero for false nulls, and
/// for true `H_i`
/// `l_i / (l * (1 + lambda l_i)^[non-leaf]) * prod over true strict
/// ancestors j of (lambda l_j / (1 + lambda l_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Evaluates the coefficient table and its sum; the sum can never exceed one,
/// which the test suites assert within float tolerance.
pub fn sum_c_check(
    metrics: &DagMetrics,
    truth: &[bool],
    lambda: f64,
) -> Result<(CoefficientTable, f64)> {
    let m = metrics.families().len();
    if truth.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: truth.len(),
        });
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda { lambda });
    }
    let leaves = metrics.leaf_count() as f64;
    let mut values = vec![0.0f64; m];
    for i in 0..m {
        if !truth[i] {
            continue;
        }
        let flow = metrics.leaf_flow(i);
        let mut c = flow / leaves;
        if !metrics.is_leaf(i) {
            c /= 1.0 + lambda * flow;
        }
        for &j in metrics.ancestors(i) {
            if j != i && truth[j] {
                let ancestor_flow = metrics.leaf_flow(j);
                c *= lambda * ancestor_flow / (1.0 + lambda * ancestor_flow);
            }
        }
        values[i] = c;
    }
    let table = CoefficientTable { values };
    let sum = table.sum();
    Ok((table, sum))
}

/// Closed-form FDR of the GELS procedure over the two-hypothesis cascade
/// base: `alpha (4 alpha + 1) / ((1 + 2 alpha)(1 + alpha))`, strictly above
/// `alpha` on `(0, 1/2)`. The cascade controls the PFER yet inflates the
/// FDR, showing that plain PFER control of the base is not enough.
pub fn counterexample_fdr(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    Ok(alpha * (4.0 * alpha + 1.0) / ((1.0 + 2.0 * alpha) * (1.0 + alpha)))
}

/// The two-hypothesis cascade base: reject the first hypothesis if
/// `P_1 <= beta / (1 + beta)` and the second if the first was rejected and
/// `P_2 <= beta`.
#[derive(Debug, Clone)]
pub struct CounterexampleBase<'a> {
    p: &'a PValues,
}

impl<'a> CounterexampleBase<'a> {
    pub fn new(p: &'a PValues) -> Result<Self> {
        if p.len() != 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                actual: p.len(),
            });
        }
        Ok(Self { p })
    }
}

impl BaseProcedure for CounterexampleBase<'_> {
    fn m(&self) -> usize {
        2
    }

    fn reject_at(&self, beta: f64) -> RejectionSet {
        let first = self.p.get(0) <= beta / (1.0 + beta);
        let second = first && self.p.get(1) <= beta;
        RejectionSet::from_mask(vec![first, second])
    }
}

/// Order-free evaluation of the parent-gated testing rule: sweep all nodes
/// repeatedly, admitting any node whose parents are all rejected and whose
/// p-value passes, until a full pass adds nothing. Must agree with the
/// single topological pass.
pub fn dag_test_fixed_point(
    dag: &Dag,
    p: &PValues,
    constants: &CriticalConstants,
) -> Result<RejectionSet> {
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
    loop {
        let mut changed = false;
        for i in 0..m {
            if !rejected[i]
                && p.get(i) <= constants.get(i)
                && dag.parents(i).iter().all(|&parent| rejected[parent])
            {
                rejected[i] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok(RejectionSet::from_mask(rejected));
        }
    }
}

/// Absolute difference between a float and an exact rational.
pub fn rational_abs_diff(float: f64, exact: &BigRational) -> f64 {
    let as_rational = BigRational::from_float(float).expect("finite float");
    (as_rational - exact)
        .abs()
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::build_dag;
    use crate::procedures::BonferroniBase;
    use crate::testutil::nine_node_example;

    fn pv(values: &[f64]) -> PValues {
        PValues::new(values.to_vec()).unwrap()
    }

    fn ratio(numerator: i64, denominator: i64) -> BigRational {
        BigRational::new(BigInt::from(numerator), BigInt::from(denominator))
    }

    #[test]
    fn r_scan_worked_example() {
        let p = pv(&[0.01, 0.02, 0.5]);
        let base = BonferroniBase::new(&p, 3.0).unwrap();
        assert_eq!(gels_r_scan(&base, &WeightFunction::Fdr, 0.15).unwrap(), 2);
    }

    #[test]
    fn r_scan_extremes() {
        let ones = pv(&[1.0; 4]);
        let base = BonferroniBase::new(&ones, 4.0).unwrap();
        assert_eq!(gels_r_scan(&base, &WeightFunction::Fdr, 0.05).unwrap(), 0);

        let zeros = pv(&[0.0; 4]);
        let base = BonferroniBase::new(&zeros, 4.0).unwrap();
        assert_eq!(gels_r_scan(&base, &WeightFunction::Fdr, 0.05).unwrap(), 4);
    }

    #[test]
    fn exact_flow_on_nine_node_example() {
        let dag = nine_node_example();
        let flow = flow_recursive(&dag);
        assert_eq!(flow.s(0, 5), BigRational::one());
        assert_eq!(flow.s(0, 6), ratio(3, 4));
        assert_eq!(flow.s(0, 7), ratio(1, 4));
        assert!(flow.s(0, 8).is_zero());
        // diagonal and non-ancestor cases
        for i in 0..9 {
            assert_eq!(flow.s(i, i), BigRational::one());
        }
        assert!(flow.s(1, 5).is_zero());

        let leaf_flows = flow.leaf_flows(&dag);
        let want = [
            ratio(2, 1),
            ratio(2, 1),
            ratio(3, 2),
            ratio(1, 1),
            ratio(3, 2),
            ratio(1, 1),
            ratio(1, 1),
            ratio(1, 1),
            ratio(1, 1),
        ];
        assert_eq!(leaf_flows, want);
    }

    #[test]
    fn exact_flow_matches_float_on_example() {
        let dag = nine_node_example();
        let metrics = DagMetrics::of(&dag);
        let flow = flow_recursive(&dag);
        for j in 0..9 {
            for i in 0..9 {
                let diff = rational_abs_diff(metrics.flow(i, j), &flow.s(i, j));
                assert!(diff < 1e-12, "s({i},{j}) differs by {diff}");
            }
        }
    }

    #[test]
    fn coefficient_sum_all_false_is_zero() {
        let dag = nine_node_example();
        let metrics = DagMetrics::of(&dag);
        let (table, sum) = sum_c_check(&metrics, &[false; 9], 0.1).unwrap();
        assert_eq!(sum, 0.0);
        assert!(table.values().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn coefficient_sum_edgeless_all_true_is_one() {
        let dag = build_dag(6, &[]).unwrap();
        let metrics = DagMetrics::of(&dag);
        let (table, sum) = sum_c_check(&metrics, &[true; 6], 0.3).unwrap();
        for &c in table.values() {
            assert!((c - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_sum_bounded_on_example() {
        let dag = nine_node_example();
        let metrics = DagMetrics::of(&dag);
        let (table, sum) = sum_c_check(&metrics, &[true; 9], 0.1).unwrap();
        assert!(sum <= 1.0 + 1e-12, "sum = {sum}");
        assert!(table.values().iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn counterexample_closed_form() {
        let value = counterexample_fdr(0.05).unwrap();
        assert!((value - 0.05 * 1.2 / (1.1 * 1.05)).abs() < 1e-15);
        assert!(value > 0.05);

        let value = counterexample_fdr(0.25).unwrap();
        assert!((value - 0.25 * 2.0 / (1.5 * 1.25)).abs() < 1e-15);
        assert!(value > 0.25);

        assert!(counterexample_fdr(0.5).is_err());
        assert!(counterexample_fdr(0.0).is_err());
    }

    #[test]
    fn counterexample_ratio_tends_to_one() {
        // value / alpha -> 1 as alpha -> 0
        for &alpha in &[1e-3, 1e-5, 1e-7] {
            let ratio = counterexample_fdr(alpha).unwrap() / alpha;
            assert!((ratio - 1.0).abs() < 10.0 * alpha);
        }
    }

    #[test]
    fn counterexample_base_cascade() {
        let p = pv(&[0.04, 0.04]);
        let base = CounterexampleBase::new(&p).unwrap();
        // At beta = 0.05 the first threshold is 0.0476: both rejected.
        assert_eq!(base.reject_at(0.05).count(), 2);
        // At beta = 0.03 the first hypothesis fails, gating the second.
        assert_eq!(base.reject_at(0.03).count(), 0);

        let p = pv(&[0.5, 0.001]);
        let base = CounterexampleBase::new(&p).unwrap();
        assert_eq!(base.reject_at(0.05).count(), 0);

        assert!(CounterexampleBase::new(&pv(&[0.5])).is_err());
    }

    #[test]
    fn fixed_point_pass_matches_single_pass() {
        let dag = nine_node_example();
        let p = pv(&[0.01, 0.9, 0.001, 0.02, 0.015, 0.003, 0.2, 0.004, 0.001]);
        let constants = CriticalConstants::new(vec![0.05; 9]).unwrap();
        let single = crate::procedures::dag_test(&dag, &p, &constants).unwrap();
        let repeated = dag_test_fixed_point(&dag, &p, &constants).unwrap();
        assert_eq!(single, repeated);
    }
}
