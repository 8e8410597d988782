//! Monte Carlo harness: replicated experiments estimating the FDR and
//! average power of the graph-aware procedures against plain BH, the PFER
//! check for the parent-gated rule, and the two-hypothesis counterexample
//! experiment.
//!
//! All randomness is counted: every replication derives its own stream from
//! `(seed, replication index)`, so results are bit-identical whether the
//! replications run serially or across any number of worker threads.

mod graph;

pub use graph::{assign_truth, build_layered_dag, generate_pvalues, TruthAssignment};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dag::{Dag, DagMetrics};
use crate::error::{Error, Result};
use crate::oracle::{counterexample_fdr, CounterexampleBase};
use crate::procedures::{
    bh_variant, dag_bh, dag_constants, dag_gels, dag_test, gels_run, BhMode, ConstantsMode,
};
use crate::types::{PValues, RejectionSet, WeightFunction};

/// Stream label for truth draws within a replication.
const STREAM_TRUTH: u64 = 0;
/// Stream label for p-value draws within a replication.
const STREAM_PVALUES: u64 = 1;
/// Replication slot reserved for the shared truth of fixed-truth runs.
const FIXED_TRUTH_SLOT: u64 = u64::MAX;

/// A deterministic generator for `(seed, stream, substream)`, independent
/// across distinct triples.
pub fn stream_rng(seed: u64, stream: u64, substream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&substream.to_le_bytes());
    key[24..32].copy_from_slice(&0x9E37_79B9_7F4A_7C15u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Derives a child seed, used by sweep drivers to give every grid cell its
/// own independent base seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The procedures the experiment harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Procedure {
    /// GELS over the PFER-controlling DAG rule (FDR weight).
    DagGels,
    /// GELS over the DAG rule with Bonferroni constants (FDR weight).
    DagBh,
    /// The conventional BH procedure, ignoring the graph.
    Bh,
}

impl Procedure {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DagGels => "dag-gels",
            Self::DagBh => "dag-bh",
            Self::Bh => "bh",
        }
    }
}

/// One grid cell of the simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Layer widths of the braided graph (top first).
    pub layer_widths: Vec<usize>,
    /// Proportion of leaf hypotheses set to true nulls.
    pub leaf_null_proportion: f64,
    /// Common correlation of the test statistics.
    pub rho: f64,
    /// Mean shift of false nulls, per layer (top first).
    pub mu_by_layer: Vec<f64>,
    /// Nominal FDR level.
    pub alpha: f64,
    /// Tuning parameter of the DAG GELS thresholds.
    pub lambda: f64,
    pub replications: usize,
    pub seed: u64,
    /// Reuse one truth assignment across replications instead of redrawing.
    pub fixed_truth: bool,
    pub procedures: Vec<Procedure>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            layer_widths: vec![1000, 1001, 1002],
            leaf_null_proportion: 0.9,
            rho: 0.0,
            mu_by_layer: vec![3.0, 2.0, 1.0],
            alpha: 0.05,
            lambda: 0.1,
            replications: 1000,
            seed: 0,
            fixed_truth: false,
            procedures: vec![Procedure::DagGels, Procedure::DagBh, Procedure::Bh],
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::ZeroReplications);
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::RhoOutOfRange { rho: self.rho });
        }
        if !(0.0..=1.0).contains(&self.leaf_null_proportion) {
            return Err(Error::PiOutOfRange {
                pi: self.leaf_null_proportion,
            });
        }
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(Error::NonPositiveLevel { level: self.alpha });
        }
        if self.lambda <= 0.0 || !self.lambda.is_finite() {
            return Err(Error::NonPositiveLambda {
                lambda: self.lambda,
            });
        }
        Ok(())
    }
}

/// Estimates for one procedure in one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureEstimate {
    pub procedure: Procedure,
    /// Mean false discovery proportion across replications.
    pub fdr_estimate: f64,
    /// Sample standard deviation of the FDP divided by sqrt(replications).
    pub fdr_stderr: f64,
    /// Mean proportion of false nulls rejected (zero when none exist).
    pub power_estimate: f64,
    pub power_stderr: f64,
    pub replications: usize,
}

/// All per-procedure estimates for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub estimates: Vec<ProcedureEstimate>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (variance / n as f64).sqrt())
}

/// The false discovery proportion and the proportion of false nulls rejected.
fn fdp_and_power(rejections: &RejectionSet, truth: &TruthAssignment) -> (f64, f64) {
    let mut false_rejections = 0usize;
    let mut true_rejections = 0usize;
    for i in 0..truth.m() {
        if rejections.is_rejected(i) {
            if truth.is_true_null(i) {
                false_rejections += 1;
            } else {
                true_rejections += 1;
            }
        }
    }
    let fdp = false_rejections as f64 / rejections.count().max(1) as f64;
    let false_nulls = truth.m() - truth.m0();
    let power = if false_nulls == 0 {
        0.0
    } else {
        true_rejections as f64 / false_nulls as f64
    };
    (fdp, power)
}

fn run_procedure(
    procedure: Procedure,
    dag: &Dag,
    metrics: &DagMetrics,
    p: &PValues,
    alpha: f64,
    lambda: f64,
) -> Result<RejectionSet> {
    match procedure {
        Procedure::DagGels => Ok(dag_gels(dag, metrics, p, alpha, lambda)?.rejections),
        Procedure::DagBh => Ok(dag_bh(dag, p, alpha)?.rejections),
        Procedure::Bh => bh_variant(p, alpha, BhMode::Plain),
    }
}

/// Runs one grid cell: per replication, draw truth (or reuse the shared one),
/// draw p-values, apply every configured procedure to the same draw, and
/// record FDP and power; then average across replications.
///
/// Replications run in parallel; aggregation is an ordered reduction by
/// replication index, so the estimates do not depend on thread scheduling.
pub fn run_experiment(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let dag = build_layered_dag(&config.layer_widths)?;
    let metrics = DagMetrics::of(&dag);

    let shared_truth = if config.fixed_truth {
        let mut rng = stream_rng(config.seed, FIXED_TRUTH_SLOT, STREAM_TRUTH);
        Some(assign_truth(&dag, config.leaf_null_proportion, &mut rng)?)
    } else {
        None
    };

    let per_replication: Vec<Vec<(f64, f64)>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<(f64, f64)>> {
            let truth = match &shared_truth {
                Some(shared) => shared.clone(),
                None => {
                    let mut rng = stream_rng(config.seed, rep as u64, STREAM_TRUTH);
                    assign_truth(&dag, config.leaf_null_proportion, &mut rng)?
                }
            };
            let mut rng = stream_rng(config.seed, rep as u64, STREAM_PVALUES);
            let p = generate_pvalues(
                &truth,
                metrics.families(),
                &config.mu_by_layer,
                config.rho,
                &mut rng,
            )?;
            config
                .procedures
                .iter()
                .map(|&procedure| {
                    let rejections =
                        run_procedure(procedure, &dag, &metrics, &p, config.alpha, config.lambda)?;
                    Ok(fdp_and_power(&rejections, &truth))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let estimates = config
        .procedures
        .iter()
        .enumerate()
        .map(|(index, &procedure)| {
            let fdps: Vec<f64> = per_replication.iter().map(|rep| rep[index].0).collect();
            let powers: Vec<f64> = per_replication.iter().map(|rep| rep[index].1).collect();
            let (fdr_estimate, fdr_stderr) = mean_and_stderr(&fdps);
            let (power_estimate, power_stderr) = mean_and_stderr(&powers);
            ProcedureEstimate {
                procedure,
                fdr_estimate,
                fdr_stderr,
                power_estimate,
                power_stderr,
                replications: config.replications,
            }
        })
        .collect();

    Ok(SimulationResult { estimates })
}

/// Outcome of the two-hypothesis counterexample experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleOutcome {
    /// Mean false discovery proportion of the GELS run over the cascade base.
    pub empirical_fdr: f64,
    pub stderr: f64,
    /// The closed-form FDR it should approach.
    pub analytic_fdr: f64,
    pub replications: usize,
}

/// Runs the counterexample: two independent uniform p-values per replication
/// (both nulls true), GELS with the FDR weight over the cascade base. The
/// empirical FDR converges to the closed form, which exceeds `alpha`.
pub fn counterexample_experiment(
    alpha: f64,
    replications: usize,
    seed: u64,
) -> Result<CounterexampleOutcome> {
    let analytic_fdr = counterexample_fdr(alpha)?;
    if replications == 0 {
        return Err(Error::ZeroReplications);
    }
    let fdps: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            use rand::Rng;
            let mut rng = stream_rng(seed, rep as u64, STREAM_PVALUES);
            let p = PValues::new(vec![rng.random::<f64>(), rng.random::<f64>()])?;
            let base = CounterexampleBase::new(&p)?;
            let run = gels_run(&base, &WeightFunction::Fdr, alpha)?;
            // Both hypotheses are true nulls, so the FDP is 1 whenever
            // anything is rejected.
            Ok(if run.r() > 0 { 1.0 } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let (empirical_fdr, stderr) = mean_and_stderr(&fdps);
    Ok(CounterexampleOutcome {
        empirical_fdr,
        stderr,
        analytic_fdr,
        replications,
    })
}

/// Empirical mean and standard error of the false-rejection count `V` for
/// the parent-gated rule at a fixed level, under the all-null configuration
/// (every `mu_i = 0`). Checks PFER control directly.
pub fn dag_pfer_experiment(
    dag: &Dag,
    metrics: &DagMetrics,
    alpha: f64,
    mode: ConstantsMode,
    rho: f64,
    replications: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if replications == 0 {
        return Err(Error::ZeroReplications);
    }
    let constants = dag_constants(metrics, alpha, mode)?;
    let truth = TruthAssignment::from_mask(vec![true; dag.m()]);
    let counts: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = stream_rng(seed, rep as u64, STREAM_PVALUES);
            let p = generate_pvalues(&truth, metrics.families(), &[], rho, &mut rng)?;
            Ok(dag_test(dag, &p, &constants)?.count() as f64)
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_stderr(&counts))
}
