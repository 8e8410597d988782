//! Property tests for the structural and procedural invariants.

mod common;

use common::{random_dag, random_pvalues, rng_for};
use dagfdr::dag::{build_dag, flow_identity_residuals, DagMetrics};
use dagfdr::oracle::{dag_test_fixed_point, gels_r_scan, rational_abs_diff};
use dagfdr::procedures::{
    bh_variant, dag_bh, dag_constants, dag_gels, dag_test, gels_run, stepup, BaseProcedure, BhMode,
    BonferroniBase, ConstantsMode, DagPferBase,
};
use dagfdr::types::{CriticalConstants, PValues, WeightFunction};
use proptest::prelude::*;
use rand::Rng;

/// Strategy: edge list over indices `0..m` with every edge pointing forward,
/// plus the node count.
fn dag_strategy(max_m: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_m).prop_flat_map(|m| {
        let edges = prop::collection::vec((0..m.max(2), 0..m.max(2)), 0..3 * m);
        (Just(m), edges).prop_map(|(m, raw)| {
            let edges: Vec<(usize, usize)> = raw
                .into_iter()
                .filter_map(|(a, b)| {
                    let (a, b) = (a % m, b % m);
                    (a != b).then(|| (a.min(b), a.max(b)))
                })
                .collect();
            (m, edges)
        })
    })
}

fn pvalues_strategy(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            4 => 0.0..=1.0f64,
            1 => Just(0.0),
            1 => Just(1.0),
            2 => (0.0..=1.0f64).prop_map(|u| u * u * u * 0.2),
        ],
        m..=m,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_identities_hold((m, edges) in dag_strategy(60)) {
        let dag = build_dag(m, &edges).unwrap();
        let metrics = DagMetrics::of(&dag);
        let residuals = flow_identity_residuals(&dag, &metrics);
        prop_assert!(residuals.conservation < 1e-12);
        prop_assert!(residuals.recurrence < 1e-12);
        // leaf flows: exactly 1 at leaves, strictly positive everywhere
        for i in 0..m {
            if metrics.is_leaf(i) {
                prop_assert_eq!(metrics.leaf_flow(i), 1.0);
            }
            prop_assert!(metrics.leaf_flow(i) > 0.0);
        }
    }

    #[test]
    fn float_flow_matches_rational_oracle((m, edges) in dag_strategy(25)) {
        let dag = build_dag(m, &edges).unwrap();
        let metrics = DagMetrics::of(&dag);
        let exact = dagfdr::oracle::flow_recursive(&dag);
        for j in 0..m {
            for i in 0..m {
                let diff = rational_abs_diff(metrics.flow(i, j), &exact.s(i, j));
                prop_assert!(diff < 1e-12, "s({}, {}) off by {}", i, j, diff);
            }
        }
    }

    #[test]
    fn hierarchy_flow_is_zero_one(
        m in 1..50usize,
        parent_picks in prop::collection::vec(any::<u64>(), 0..50),
    ) {
        // Every node gets at most one parent (an earlier node), so the graph
        // is a forest: flow weights collapse to membership indicators and
        // each leaf flow counts the leaves below the node.
        let edges: Vec<(usize, usize)> = (1..m)
            .zip(parent_picks)
            .filter(|(_, pick)| pick % 3 != 0)
            .map(|(child, pick)| ((pick as usize / 3) % child, child))
            .collect();
        let dag = build_dag(m, &edges).unwrap();
        let metrics = DagMetrics::of(&dag);
        for j in 0..m {
            for i in 0..m {
                let s = metrics.flow(i, j);
                prop_assert!(s == 0.0 || s == 1.0, "s({}, {}) = {}", i, j, s);
            }
        }
        for i in 0..m {
            let leaves_below = metrics
                .descendants(i)
                .iter()
                .filter(|&&d| metrics.is_leaf(d))
                .count() as f64;
            prop_assert_eq!(metrics.leaf_flow(i), leaves_below);
        }
    }

    #[test]
    fn gels_agrees_with_exhaustive_scan(
        (m, edges) in dag_strategy(30),
        values in pvalues_strategy(30),
        alpha in 0.005..0.4f64,
    ) {
        let dag = build_dag(m, &edges).unwrap();
        let metrics = DagMetrics::of(&dag);
        let p = PValues::new(values[..m].to_vec()).unwrap();

        let bonf = BonferroniBase::conventional(&p);
        let run = gels_run(&bonf, &WeightFunction::Fdr, alpha).unwrap();
        prop_assert_eq!(run.r(), gels_r_scan(&bonf, &WeightFunction::Fdr, alpha).unwrap());

        let gated = DagPferBase::new(&dag, &metrics, &p, 2.0 * alpha).unwrap();
        let run = gels_run(&gated, &WeightFunction::Fdr, alpha).unwrap();
        prop_assert_eq!(run.r(), gels_r_scan(&gated, &WeightFunction::Fdr, alpha).unwrap());
    }

    #[test]
    fn gels_with_bonferroni_is_bh(
        values in pvalues_strategy(40),
        alpha in 0.005..0.4f64,
    ) {
        let p = PValues::new(values).unwrap();
        let base = BonferroniBase::conventional(&p);
        let run = gels_run(&base, &WeightFunction::Fdr, alpha).unwrap();
        let bh = bh_variant(&p, alpha, BhMode::Plain).unwrap();
        prop_assert_eq!(run.rejections, bh);
    }

    #[test]
    fn dag_outputs_ancestor_closed_and_gated_bh_is_subset(
        (m, edges) in dag_strategy(40),
        values in pvalues_strategy(40),
        alpha in 0.005..0.4f64,
    ) {
        let dag = build_dag(m, &edges).unwrap();
        let metrics = DagMetrics::of(&dag);
        let p = PValues::new(values[..m].to_vec()).unwrap();

        let gels = dag_gels(&dag, &metrics, &p, alpha, 2.0 * alpha).unwrap();
        let gated_bh = dag_bh(&dag, &p, alpha).unwrap();
        let plain = bh_variant(&p, alpha, BhMode::Plain).unwrap();
        for set in [&gels.rejections, &gated_bh.rejections] {
            for i in 0..m {
                if set.is_rejected(i) {
                    for &a in metrics.ancestors(i) {
                        prop_assert!(set.is_rejected(a));
                    }
                }
            }
        }
        for i in 0..m {
            prop_assert!(!gated_bh.rejections.is_rejected(i) || plain.is_rejected(i));
        }
    }

    #[test]
    fn stepup_count_is_its_own_rank(
        values in pvalues_strategy(30),
        alpha in 0.01..0.5f64,
    ) {
        // The rejection count of a stepup procedure equals the rank R that
        // defined its threshold, ties included.
        let m = values.len();
        let p = PValues::new(values).unwrap();
        let constants = CriticalConstants::new(
            (1..=m).map(|i| (i as f64 * alpha / m as f64).min(1.0)).collect(),
        ).unwrap();
        let set = stepup(&p, &constants).unwrap();
        let mut sorted = p.as_slice().to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let rank = (1..=m).rev().find(|&r| sorted[r - 1] <= constants.get(r - 1)).unwrap_or(0);
        prop_assert_eq!(set.count(), rank);
    }

    #[test]
    fn fixed_point_pass_equals_topological_pass(
        (m, edges) in dag_strategy(40),
        values in pvalues_strategy(40),
        threshold in 0.0..=1.0f64,
    ) {
        let dag = build_dag(m, &edges).unwrap();
        let p = PValues::new(values[..m].to_vec()).unwrap();
        let constants = CriticalConstants::new(vec![threshold; m]).unwrap();
        let single = dag_test(&dag, &p, &constants).unwrap();
        let repeated = dag_test_fixed_point(&dag, &p, &constants).unwrap();
        prop_assert_eq!(single, repeated);
    }
}

/// Every shipped base must be alpha-monotone over a level grid; sampled with
/// seeded randomness over p-values and graphs.
#[test]
fn shipped_bases_are_alpha_monotone_on_level_grid() {
    for case in 0..40u64 {
        let mut rng = rng_for(1, case);
        let dag = random_dag(&mut rng, 50);
        let m = dag.m();
        let metrics = DagMetrics::of(&dag);
        let p = random_pvalues(&mut rng, m);
        let gamma = rng.random_range(0.2..0.8);
        let k = rng.random_range(1..=m);
        let weights: Vec<f64> = {
            let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.01).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|w| w * m as f64 / sum).collect()
        };

        let bonferroni = BonferroniBase::conventional(&p);
        let weighted = dagfdr::procedures::WeightedBonferroniBase::new(&p, weights).unwrap();
        let adaptive = dagfdr::procedures::AdaptiveBonferroniBase::new(&p, gamma).unwrap();
        let kfdr = dagfdr::procedures::KfdrSingleStepBase::new(&p, k).unwrap();
        let gated_pfer = DagPferBase::new(&dag, &metrics, &p, 0.1).unwrap();
        let gated_bonf = dagfdr::procedures::DagBonferroniBase::new(&dag, &p).unwrap();
        let bases: Vec<&dyn BaseProcedure> = vec![
            &bonferroni,
            &weighted,
            &adaptive,
            &kfdr,
            &gated_pfer,
            &gated_bonf,
        ];

        for base in bases {
            let mut previous = 0usize;
            for step in 1..=100 {
                let beta = 0.02 * step as f64;
                let count = base.reject_at(beta).count();
                assert!(
                    count >= previous,
                    "case {case}: rejections fell from {previous} to {count} at beta={beta}"
                );
                previous = count;
            }
        }
    }
}

/// Critical constants of the gated rule are non-decreasing in the level for
/// fixed lambda, which is what makes the descent converge.
#[test]
fn dag_constants_monotone_in_level() {
    for case in 0..40u64 {
        let mut rng = rng_for(2, case);
        let dag = random_dag(&mut rng, 60);
        let metrics = DagMetrics::of(&dag);
        let lambda = rng.random_range(0.01..1.0);
        let mut previous = vec![0.0; dag.m()];
        for step in 1..=100 {
            let beta = 0.02 * step as f64;
            let constants =
                dag_constants(&metrics, beta, ConstantsMode::PferLambda { lambda }).unwrap();
            for (i, floor) in previous.iter_mut().enumerate() {
                assert!(constants.get(i) + 1e-15 >= *floor);
                *floor = constants.get(i);
            }
        }
    }
}
