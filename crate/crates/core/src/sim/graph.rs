//! Inputs for the Monte Carlo study: the braided layered graph, the truth
//! cascade, and equicorrelated one-sided Z-test p-values.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dag::{build_dag, Dag};
use crate::error::{Error, Result};
use crate::types::PValues;

/// Builds the braided layered graph: node `i` of layer `k` has children `i`
/// and `i + 1` of layer `k + 1`, which requires each layer to be exactly one
/// node wider than the one above. Widths `[2, 3, 4]` reproduce the nine-node
/// example graph.
pub fn build_layered_dag(layer_widths: &[usize]) -> Result<Dag> {
    for (k, &width) in layer_widths.iter().enumerate() {
        let ok = width >= 1 && (k == 0 || width == layer_widths[k - 1] + 1);
        if !ok {
            return Err(Error::BadLayerWidths {
                widths: layer_widths.to_vec(),
            });
        }
    }
    let m: usize = layer_widths.iter().sum();
    let mut edges = Vec::new();
    let mut offset = 0;
    for window in layer_widths.windows(2) {
        let width = window[0];
        let next_offset = offset + width;
        for position in 0..width {
            edges.push((offset + position, next_offset + position));
            edges.push((offset + position, next_offset + position + 1));
        }
        offset = next_offset;
    }
    build_dag(m, &edges)
}

/// A truth mask over the hypotheses (`true` = the null holds) with the
/// true-null count `m0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthAssignment {
    truth: Vec<bool>,
    m0: usize,
}

impl TruthAssignment {
    /// Wraps an explicit mask.
    pub fn from_mask(truth: Vec<bool>) -> Self {
        let m0 = truth.iter().filter(|&&t| t).count();
        Self { truth, m0 }
    }

    pub fn mask(&self) -> &[bool] {
        &self.truth
    }

    pub fn is_true_null(&self, i: usize) -> bool {
        self.truth[i]
    }

    pub fn m(&self) -> usize {
        self.truth.len()
    }

    /// Number of true null hypotheses.
    pub fn m0(&self) -> usize {
        self.m0
    }
}

/// Draws a truth assignment: `floor(pi * l)` leaves chosen uniformly without
/// replacement are set true, the remaining leaves false, and every non-leaf
/// becomes true exactly when all of its children are true (applied up the
/// graph in reverse topological order).
pub fn assign_truth<R: Rng + ?Sized>(dag: &Dag, pi: f64, rng: &mut R) -> Result<TruthAssignment> {
    if !(0.0..=1.0).contains(&pi) || !pi.is_finite() {
        return Err(Error::PiOutOfRange { pi });
    }
    let m = dag.m();
    let leaves: Vec<usize> = (0..m).filter(|&i| dag.is_leaf(i)).collect();
    let true_leaves = ((pi * leaves.len() as f64).floor() as usize).min(leaves.len());

    let mut truth = vec![false; m];
    for index in rand::seq::index::sample(rng, leaves.len(), true_leaves) {
        truth[leaves[index]] = true;
    }
    for &i in dag.topo_order().iter().rev() {
        if !dag.is_leaf(i) {
            truth[i] = dag.children(i).iter().all(|&child| truth[child]);
        }
    }
    Ok(TruthAssignment::from_mask(truth))
}

/// Draws one-sided Z-test p-values with common correlation `rho`.
///
/// Each statistic is `X_i = sqrt(rho) Z_0 + sqrt(1 - rho) Z_i + mu_i` with a
/// shared factor `Z_0`, which realizes the equicorrelated covariance exactly
/// in O(m). True nulls get `mu_i = 0`; false nulls get the shift of their
/// layer (`families[i] - 1`), with layers past the end of `mu_by_layer`
/// reusing its last entry. P-values are `1 - Phi(X_i)`.
pub fn generate_pvalues<R: Rng + ?Sized>(
    truth: &TruthAssignment,
    families: &[usize],
    mu_by_layer: &[f64],
    rho: f64,
    rng: &mut R,
) -> Result<PValues> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange { rho });
    }
    let m = truth.m();
    if families.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: families.len(),
        });
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let shared_loading = rho.sqrt();
    let own_loading = (1.0 - rho).sqrt();
    let shared: f64 = rng.sample(rand_distr::StandardNormal);
    let mut values = Vec::with_capacity(m);
    for (i, &family) in families.iter().enumerate() {
        let mu = if truth.is_true_null(i) {
            0.0
        } else {
            let layer = family.saturating_sub(1);
            mu_by_layer
                .get(layer)
                .or_else(|| mu_by_layer.last())
                .copied()
                .unwrap_or(0.0)
        };
        let own: f64 = rng.sample(rand_distr::StandardNormal);
        let x = shared_loading * shared + own_loading * own + mu;
        values.push(1.0 - normal.cdf(x));
    }
    PValues::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{compute_metrics, DagMetrics};
    use crate::sim::stream_rng;
    use crate::testutil::nine_node_example;

    #[test]
    fn widths_2_3_4_reproduce_nine_node_example() {
        let dag = build_layered_dag(&[2, 3, 4]).unwrap();
        assert_eq!(dag, nine_node_example());
        assert_eq!(dag.edges().len(), 10);
    }

    #[test]
    fn single_node_layer() {
        let dag = build_layered_dag(&[1]).unwrap();
        assert_eq!(dag.m(), 1);
        assert!(dag.is_leaf(0));
    }

    #[test]
    fn empty_widths_give_empty_graph() {
        assert_eq!(build_layered_dag(&[]).unwrap().m(), 0);
    }

    #[test]
    fn bad_widths_rejected() {
        assert!(build_layered_dag(&[2, 4]).is_err());
        assert!(build_layered_dag(&[3, 2]).is_err());
        assert!(build_layered_dag(&[0, 1]).is_err());
    }

    #[test]
    fn desk_scale_braid_shape() {
        let dag = build_layered_dag(&[1000, 1001, 1002]).unwrap();
        assert_eq!(dag.m(), 3003);
        let metrics = compute_metrics(&dag);
        assert_eq!(metrics.leaf_count(), 1002);
        // interior nodes of the middle layer have two parents and two children
        assert_eq!(dag.parents(1500).len(), 2);
        assert_eq!(dag.children(1500).len(), 2);
        assert_eq!(metrics.family(1500), 2);
    }

    #[test]
    fn truth_all_or_nothing() {
        let dag = nine_node_example();
        let mut rng = stream_rng(7, 0, 0);
        let all = assign_truth(&dag, 1.0, &mut rng).unwrap();
        assert_eq!(all.m0(), 9);
        let none = assign_truth(&dag, 0.0, &mut rng).unwrap();
        assert_eq!(none.m0(), 0);
    }

    #[test]
    fn truth_cascade_on_nine_node_example() {
        // Hand-picked leaves: 5 and 6 true, 7 and 8 false. Node 2 has
        // children {5, 6} so it is true; node 3 has {6, 7} so false; node 0
        // has {2, 3} so false.
        let dag = nine_node_example();
        let mut truth = vec![false; 9];
        truth[5] = true;
        truth[6] = true;
        for &i in dag.topo_order().iter().rev() {
            if !dag.is_leaf(i) {
                truth[i] = dag.children(i).iter().all(|&c| truth[c]);
            }
        }
        let assignment = TruthAssignment::from_mask(truth);
        assert!(assignment.is_true_null(2));
        assert!(!assignment.is_true_null(3));
        assert!(!assignment.is_true_null(0));
        assert_eq!(assignment.m0(), 3);
    }

    #[test]
    fn truth_cascade_invariant_random_pi() {
        let dag = build_layered_dag(&[5, 6, 7]).unwrap();
        for (case, &pi) in [0.3, 0.5, 0.8].iter().enumerate() {
            let mut rng = stream_rng(11, case as u64, 0);
            let assignment = assign_truth(&dag, pi, &mut rng).unwrap();
            let expected_true_leaves = (pi * 7.0).floor() as usize;
            let true_leaves = (0..dag.m())
                .filter(|&i| dag.is_leaf(i) && assignment.is_true_null(i))
                .count();
            assert_eq!(true_leaves, expected_true_leaves);
            for i in 0..dag.m() {
                if !dag.is_leaf(i) {
                    let all_children_true =
                        dag.children(i).iter().all(|&c| assignment.is_true_null(c));
                    assert_eq!(assignment.is_true_null(i), all_children_true);
                }
            }
        }
    }

    #[test]
    fn pi_out_of_range() {
        let dag = nine_node_example();
        let mut rng = stream_rng(1, 0, 0);
        assert!(assign_truth(&dag, -0.1, &mut rng).is_err());
        assert!(assign_truth(&dag, 1.1, &mut rng).is_err());
    }

    #[test]
    fn pvalues_in_range_and_deterministic() {
        let dag = build_layered_dag(&[2, 3, 4]).unwrap();
        let metrics = DagMetrics::of(&dag);
        let truth = TruthAssignment::from_mask(vec![false; 9]);
        let draw = |seed| {
            let mut rng = stream_rng(seed, 0, 1);
            generate_pvalues(&truth, metrics.families(), &[3.0, 2.0, 1.0], 0.3, &mut rng).unwrap()
        };
        let a = draw(5);
        let b = draw(5);
        let c = draw(6);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.as_slice().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn rho_out_of_range() {
        let truth = TruthAssignment::from_mask(vec![true; 3]);
        let mut rng = stream_rng(1, 0, 0);
        assert!(generate_pvalues(&truth, &[1, 1, 1], &[1.0], 1.0, &mut rng).is_err());
        assert!(generate_pvalues(&truth, &[1, 1, 1], &[1.0], -0.2, &mut rng).is_err());
    }

    #[test]
    fn signal_shrinks_pvalues() {
        // With a large shift, false nulls should produce small p-values
        // nearly always.
        let truth = TruthAssignment::from_mask(vec![false; 200]);
        let mut rng = stream_rng(42, 0, 2);
        let p = generate_pvalues(&truth, &vec![1; 200], &[5.0], 0.0, &mut rng).unwrap();
        let below = p.as_slice().iter().filter(|&&v| v < 0.05).count();
        assert!(below > 180, "only {below} of 200 below 0.05");
    }
}
