//! The hypothesis graph and its derived structure: families, ancestor and
//! descendant sets, leaves, flow weights `s_{i,j}`, and leaf flows `l_i`.
//!
//! Flow weights follow a water analogy: a unit of mass starts at node `j` and
//! flows against the edges, splitting evenly among the parents at every node
//! it passes. `s_{i,j}` is the share of that mass passing through `i`, and
//! `l_i` is the total mass reaching `i` when one unit starts at every leaf.

use crate::error::{Error, Result};

/// An immutable directed acyclic graph over `m` hypothesis nodes, stored as
/// sorted, duplicate-free parent lists plus the derived child lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    m: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

/// Builds a [`Dag`] from `(parent, child)` index pairs.
///
/// Duplicate edges are allowed on input and collapsed. Fails with
/// [`Error::IndexOutOfRange`] on an endpoint outside `[0, m)` and with
/// [`Error::CycleDetected`] (naming one node on a cycle) if the edge list is
/// not acyclic. The empty graph (`m = 0`) is legal.
pub fn build_dag(m: usize, edges: &[(usize, usize)]) -> Result<Dag> {
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(parent, child) in edges {
        if parent >= m {
            return Err(Error::IndexOutOfRange { index: parent, m });
        }
        if child >= m {
            return Err(Error::IndexOutOfRange { index: child, m });
        }
        parents[child].push(parent);
    }
    for list in &mut parents {
        list.sort_unstable();
        list.dedup();
    }
    for (child, list) in parents.iter().enumerate() {
        for &parent in list {
            children[parent].push(child);
        }
    }
    for list in &mut children {
        list.sort_unstable();
    }

    let topo = topological_order(m, &parents, &children)?;
    Ok(Dag {
        m,
        parents,
        children,
        topo,
    })
}

/// Kahn's algorithm; on failure walks the unprocessed remainder upwards to
/// name a node that actually lies on a cycle.
fn topological_order(
    m: usize,
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let mut in_degree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: std::collections::VecDeque<usize> =
        (0..m).filter(|&i| in_degree[i] == 0).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(node) = queue.pop_front() {
        order.push(node);
        for &child in &children[node] {
            in_degree[child] -= 1;
            if in_degree[child] == 0 {
                queue.push_back(child);
            }
        }
    }
    if order.len() == m {
        return Ok(order);
    }

    // Every unprocessed node retains an unprocessed parent, so following
    // parent links inside the remainder must revisit a node; that node is on
    // a cycle.
    let mut visited = vec![false; m];
    let mut node = (0..m)
        .find(|&i| in_degree[i] > 0)
        .expect("remainder is non-empty");
    loop {
        if visited[node] {
            return Err(Error::CycleDetected { node });
        }
        visited[node] = true;
        node = *parents[node]
            .iter()
            .find(|&&p| in_degree[p] > 0)
            .expect("unprocessed node has an unprocessed parent");
    }
}

impl Dag {
    /// Number of nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Sorted parent indices of `i`.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// Sorted child indices of `i`.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// A node is a leaf when it has no outgoing edges.
    pub fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    /// A topological order (every parent precedes its children).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// All edges as `(parent, child)` pairs in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for parent in 0..self.m {
            for &child in &self.children[parent] {
                out.push((parent, child));
            }
        }
        out
    }
}

/// Structure derived from a [`Dag`]: families, ancestor/descendant sets, leaf
/// flags, and (after [`compute_flow`]) the flow weights and leaf flows.
#[derive(Debug, Clone, PartialEq)]
pub struct DagMetrics {
    family: Vec<usize>,
    ancestors: Vec<Vec<usize>>,
    descendants: Vec<Vec<usize>>,
    is_leaf: Vec<bool>,
    leaf_count: usize,
    /// Per column `j`: flow weights aligned with `ancestors[j]`; empty until
    /// [`compute_flow`] runs.
    flow: Vec<Vec<f64>>,
    leaf_flow: Vec<f64>,
}

/// Computes families, ancestor and descendant sets, and leaf flags.
///
/// The family index of a node is one plus the longest path (in edges) leading
/// to it, so parentless nodes form family 1. Ancestor and descendant sets
/// both include the node itself. Flow weights are left unfilled; see
/// [`compute_flow`].
pub fn compute_metrics(dag: &Dag) -> DagMetrics {
    let m = dag.m();
    let mut family = vec![0usize; m];
    let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut descendants: Vec<Vec<usize>> = vec![Vec::new(); m];

    let mut mark = vec![false; m];
    for &i in dag.topo_order() {
        family[i] = 1 + dag.parents(i).iter().map(|&p| family[p]).max().unwrap_or(0);

        let mut set = vec![i];
        mark[i] = true;
        for &p in dag.parents(i) {
            for &a in &ancestors[p] {
                if !mark[a] {
                    mark[a] = true;
                    set.push(a);
                }
            }
        }
        for &a in &set {
            mark[a] = false;
        }
        set.sort_unstable();
        ancestors[i] = set;
    }

    for &i in dag.topo_order().iter().rev() {
        let mut set = vec![i];
        mark[i] = true;
        for &c in dag.children(i) {
            for &d in &descendants[c] {
                if !mark[d] {
                    mark[d] = true;
                    set.push(d);
                }
            }
        }
        for &d in &set {
            mark[d] = false;
        }
        set.sort_unstable();
        descendants[i] = set;
    }

    let is_leaf: Vec<bool> = (0..m).map(|i| descendants[i].len() == 1).collect();
    let leaf_count = is_leaf.iter().filter(|&&l| l).count();

    DagMetrics {
        family,
        ancestors,
        descendants,
        is_leaf,
        leaf_count,
        flow: Vec::new(),
        leaf_flow: Vec::new(),
    }
}

/// Fills the flow weights `s_{i,j}` and leaf flows `l_i`.
///
/// Columns are produced in topological order: the column of node `j` is the
/// average of its parents' columns plus the unit entry `s_{j,j} = 1`, which
/// is exactly the even-split recursion of the flow definition. `l_i` then
/// sums column entries over leaf columns.
pub fn compute_flow(dag: &Dag, metrics: DagMetrics) -> DagMetrics {
    let m = dag.m();
    let mut metrics = metrics;
    let mut flow: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut scratch = vec![0.0f64; m];

    for &j in dag.topo_order() {
        scratch[j] = 1.0;
        let share = if dag.parents(j).is_empty() {
            0.0
        } else {
            1.0 / dag.parents(j).len() as f64
        };
        for &k in dag.parents(j) {
            for (&a, &value) in metrics.ancestors[k].iter().zip(&flow[k]) {
                scratch[a] += value * share;
            }
        }
        let column: Vec<f64> = metrics.ancestors[j].iter().map(|&a| scratch[a]).collect();
        for &a in &metrics.ancestors[j] {
            scratch[a] = 0.0;
        }
        flow[j] = column;
    }

    let mut leaf_flow = vec![0.0f64; m];
    for (j, column) in flow.iter().enumerate() {
        if metrics.is_leaf[j] {
            for (&a, &value) in metrics.ancestors[j].iter().zip(column) {
                leaf_flow[a] += value;
            }
        }
    }

    metrics.flow = flow;
    metrics.leaf_flow = leaf_flow;
    metrics
}

impl DagMetrics {
    /// Convenience: metrics with flow already filled.
    pub fn of(dag: &Dag) -> Self {
        compute_flow(dag, compute_metrics(dag))
    }

    /// One-based family index of `i` (longest incoming path plus one).
    pub fn family(&self, i: usize) -> usize {
        self.family[i]
    }

    pub fn families(&self) -> &[usize] {
        &self.family
    }

    /// Sorted ancestor set of `i`, including `i` itself.
    pub fn ancestors(&self, i: usize) -> &[usize] {
        &self.ancestors[i]
    }

    /// Sorted descendant set of `i`, including `i` itself.
    pub fn descendants(&self, i: usize) -> &[usize] {
        &self.descendants[i]
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.is_leaf[i]
    }

    /// Total number of leaf nodes.
    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Whether [`compute_flow`] has filled the flow weights.
    pub fn has_flow(&self) -> bool {
        !self.flow.is_empty() || self.ancestors.is_empty()
    }

    /// Flow weight `s_{i,j}`; zero whenever `i` is not an ancestor of `j`.
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        assert!(
            self.has_flow(),
            "flow weights not computed; call compute_flow first"
        );
        match self.ancestors[j].binary_search(&i) {
            Ok(pos) => self.flow[j][pos],
            Err(_) => 0.0,
        }
    }

    /// Leaf flow `l_i`.
    pub fn leaf_flow(&self, i: usize) -> f64 {
        assert!(
            self.has_flow(),
            "flow weights not computed; call compute_flow first"
        );
        self.leaf_flow[i]
    }

    pub fn leaf_flows(&self) -> &[f64] {
        &self.leaf_flow
    }
}

/// Worst-case absolute deviations of the two flow identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowResiduals {
    /// Deviation of `sum over parentless k of s_{k,j}` from 1, maximized
    /// over columns `j` (mass conservation: all flow reaches the top).
    pub conservation: f64,
    /// Deviation of `s_{i,j}` from `sum over children k of i of
    /// s_{k,j} / |parents of k|`, maximized over pairs `i != j` (the
    /// child-sum recurrence).
    pub recurrence: f64,
}

/// Evaluates both flow identities on computed metrics.
///
/// The recurrence side is summed over children, the opposite direction from
/// the parent-average recursion [`compute_flow`] uses, so agreement is a
/// genuine cross-check rather than a tautology.
pub fn flow_identity_residuals(dag: &Dag, metrics: &DagMetrics) -> FlowResiduals {
    let m = dag.m();
    let mut conservation = 0.0f64;
    let mut recurrence = 0.0f64;
    for j in 0..m {
        let mut top_sum = 0.0;
        for (&i, &value) in metrics.ancestors(j).iter().zip(&metrics.flow[j]) {
            if dag.parents(i).is_empty() {
                top_sum += value;
            }
            if i != j {
                let child_sum: f64 = dag
                    .children(i)
                    .iter()
                    .map(|&k| metrics.flow(k, j) / dag.parents(k).len() as f64)
                    .sum();
                recurrence = recurrence.max((value - child_sum).abs());
            }
        }
        conservation = conservation.max((top_sum - 1.0).abs());
    }
    FlowResiduals {
        conservation,
        recurrence,
    }
}
