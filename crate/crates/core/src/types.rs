//! Shared domain types: p-values, rejection sets, weight functions, and
//! per-node critical constants.

use crate::error::{Error, Result};

/// An index-aligned vector of p-values, each validated to lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PValues {
    values: Vec<f64>,
}

impl PValues {
    /// Validates every entry into `[0, 1]` (NaN and infinities are rejected).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidPValue { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// The outcome of a testing procedure: a rejection mask plus its popcount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectionSet {
    rejected: Vec<bool>,
    count: usize,
}

impl RejectionSet {
    /// Wraps a mask; the rejection count is derived, never stored separately.
    pub fn from_mask(rejected: Vec<bool>) -> Self {
        let count = rejected.iter().filter(|&&r| r).count();
        Self { rejected, count }
    }

    /// The empty rejection set over `m` hypotheses.
    pub fn none(m: usize) -> Self {
        Self {
            rejected: vec![false; m],
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    /// Number of rejected hypotheses (`R`).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_rejected(&self, i: usize) -> bool {
        self.rejected[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.rejected
    }

    /// Indices of rejected hypotheses in ascending order.
    pub fn rejected_indices(&self) -> Vec<usize> {
        self.rejected
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
            .collect()
    }
}

/// A non-increasing, strictly positive weight `W(r)` of the rejection count,
/// turning a simple error measure into a two-parameter error rate.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    /// `W(r) = 1`: the plain per-family error rate.
    Pfer,
    /// `W(r) = 1 / max(r, 1)`: the false discovery rate.
    Fdr,
    /// `W(r) = 1 / max(r, k)`: the generalized (k-)FDR.
    KFdr(usize),
    /// Tabulated weights `W(0), W(1), ...`, validated at construction.
    Custom(Vec<f64>),
}

impl WeightFunction {
    /// Builds a tabulated weight function, rejecting tables that are not
    /// strictly positive, exceed one, or increase anywhere.
    pub fn custom(table: Vec<f64>) -> Result<Self> {
        let mut previous = 1.0_f64;
        for (r, &w) in table.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 || w > 1.0 || w > previous {
                return Err(Error::InvalidWeightFunction { r });
            }
            previous = w;
        }
        Ok(Self::Custom(table))
    }

    /// Evaluates `W(r)`.
    pub fn eval(&self, r: usize) -> f64 {
        match self {
            Self::Pfer => 1.0,
            Self::Fdr => 1.0 / r.max(1) as f64,
            Self::KFdr(k) => 1.0 / r.max(*k).max(1) as f64,
            Self::Custom(table) => table[r],
        }
    }

    /// Checks that the function is defined on the full domain `{0, ..., m}`.
    pub fn check_domain(&self, m: usize) -> Result<()> {
        match self {
            Self::Custom(table) if table.len() < m + 1 => {
                Err(Error::InvalidWeightFunction { r: table.len() })
            }
            _ => Ok(()),
        }
    }
}

/// Per-node rejection thresholds, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalConstants {
    thresholds: Vec<f64>,
}

impl CriticalConstants {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        for (index, &value) in thresholds.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidConstant { index, value });
            }
        }
        Ok(Self { thresholds })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.thresholds[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.thresholds
    }
}
