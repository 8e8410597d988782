//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by graph construction, testing procedures, and the
/// simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An edge endpoint does not lie in `[0, m)`.
    #[error("node index {index} out of range for a graph on {m} nodes")]
    IndexOutOfRange { index: usize, m: usize },
    /// The edge list contains a directed cycle; `node` lies on one.
    #[error("graph contains a directed cycle through node {node}")]
    CycleDetected { node: usize },
    /// A p-value fell outside `[0, 1]` (or was not finite).
    #[error("p-value at index {index} is {value}, outside [0, 1]")]
    InvalidPValue { index: usize, value: f64 },
    /// A significance level was zero or negative.
    #[error("significance level must be positive, got {level}")]
    NonPositiveLevel { level: f64 },
    /// A threshold denominator was zero or negative.
    #[error("denominator must be positive, got {denominator}")]
    NonPositiveDenominator { denominator: f64 },
    /// Weights did not sum to the required total within tolerance.
    #[error("weights must sum to {expected}, got {sum}")]
    WeightNormalization { sum: f64, expected: f64 },
    /// A hypothesis weight was negative (or not finite).
    #[error("weight at index {index} is {weight}, must be non-negative")]
    NegativeWeight { index: usize, weight: f64 },
    /// The tuning parameter of the true-null estimator was outside `(0, 1)`.
    #[error("gamma must lie in (0, 1), got {gamma}")]
    GammaOutOfRange { gamma: f64 },
    /// `k` outside `[1, m]` for a k-FDR procedure.
    #[error("k must lie in [1, {m}], got {k}")]
    KOutOfRange { k: usize, m: usize },
    /// The operation needs at least one node.
    #[error("operation requires a non-empty graph")]
    EmptyDag,
    /// The tuning parameter lambda was zero or negative.
    #[error("lambda must be positive, got {lambda}")]
    NonPositiveLambda { lambda: f64 },
    /// Two index-aligned inputs had different lengths.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// Stepup critical constants must be non-decreasing.
    #[error("critical constants decrease at index {index}")]
    NonMonotoneConstants { index: usize },
    /// A critical constant fell outside `[0, 1]`.
    #[error("critical constant at index {index} is {value}, outside [0, 1]")]
    InvalidConstant { index: usize, value: f64 },
    /// A tabulated weight function was non-positive, above one, or increasing.
    #[error(
        "weight function must take values in (0, 1] and be non-increasing (violation at r = {r})"
    )]
    InvalidWeightFunction { r: usize },
    /// The self-consistent descent observed the rejection count rising, which
    /// only a base procedure that is not alpha-monotone can produce.
    #[error(
        "base procedure is not alpha-monotone: rejections rose from {previous} to {current} \
         during the descent"
    )]
    NonMonotoneBase { previous: usize, current: usize },
    /// Alpha outside the domain of the closed-form counterexample.
    #[error("alpha must lie in (0, 1/2), got {alpha}")]
    AlphaOutOfRange { alpha: f64 },
    /// Layer widths incompatible with the braided layered-graph generator.
    #[error("layer widths must be positive and grow by exactly one per layer, got {widths:?}")]
    BadLayerWidths { widths: Vec<usize> },
    /// A Monte Carlo run was asked for zero replications.
    #[error("replications must be at least 1")]
    ZeroReplications,
    /// Common correlation outside `[0, 1)`.
    #[error("rho must lie in [0, 1), got {rho}")]
    RhoOutOfRange { rho: f64 },
    /// Leaf true-null proportion outside `[0, 1]`.
    #[error("leaf null proportion must lie in [0, 1], got {pi}")]
    PiOutOfRange { pi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
