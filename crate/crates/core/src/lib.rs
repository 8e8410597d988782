//! Multiple testing with graph structure: procedures that control the false
//! discovery rate (FDR) and per-family error rate (PFER) for hypotheses
//! arranged in a directed acyclic graph, together with the flat stepup
//! family, brute-force verification oracles, and a Monte Carlo harness.
//!
//! The centerpiece is a self-consistent meta-procedure (GELS): given a
//! level-parameterized base rule and a non-increasing weight `W(R)` of the
//! rejection count, it applies the base at the level `alpha / W(R)` whose
//! rejection count reproduces itself. With a Bonferroni base and the FDR
//! weight this is exactly the BH procedure; with the PFER-controlling
//! DAG rule as the base it yields an FDR-controlling procedure whose
//! rejection set stays closed under ancestors.
//!
//! Modules:
//! - [`dag`]: the hypothesis graph and its derived structure (families,
//!   ancestor sets, flow weights, leaf flows).
//! - [`procedures`]: Bonferroni variants, stepup, the BH family, k-FDR
//!   procedures, the parent-gated DAG rule, and the GELS driver.
//! - [`oracle`]: independent brute-force references (exhaustive rejection
//!   scan, exact rational flow, proof-side coefficient bound, closed-form
//!   counterexample).
//! - [`sim`]: layered-graph generator, truth assignment, equicorrelated
//!   p-value draws, and replicated FDR/power experiments.

pub mod dag;
pub mod error;
pub mod oracle;
pub mod procedures;
pub mod sim;
pub mod types;

pub use dag::{
    build_dag, compute_flow, compute_metrics, flow_identity_residuals, Dag, DagMetrics,
    FlowResiduals,
};
pub use error::{Error, Result};
pub use types::{CriticalConstants, PValues, RejectionSet, WeightFunction};
