//! Command-line front end.
//!
//! Three commands: `test` applies a procedure to p-value (and optionally
//! edge-list) files, `simulate` runs a Monte Carlo sweep from a JSON config,
//! and `inspect` reports graph structure and flow diagnostics. Exit codes:
//! 0 success, 2 invalid input, 1 internal error.

mod config;
mod formats;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dagfdr::dag::{flow_identity_residuals, Dag, DagMetrics};
use dagfdr::procedures::{
    adaptive_m0, bh_variant, bonferroni, dag_bh, dag_constants, dag_gels, dag_test,
    kfdr_single_step, kfdr_stepup, kfdr_threshold, weighted_bonferroni, BhMode, ConstantsMode,
};
use dagfdr::sim::run_experiment;
use dagfdr::types::{PValues, RejectionSet};

use config::SweepConfig;
use formats::{
    align_values, emit_edges, fmt_full, invalid, open_output, parse_dag_file, parse_value_file,
    read_text, CliError, NodeTable,
};

#[derive(Parser)]
#[command(
    name = "dagfdr",
    version,
    about = "FDR/PFER-controlling multiple testing, with and without graph structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a testing procedure to user-supplied files
    Test(TestArgs),
    /// Run a Monte Carlo sweep described by a JSON config file
    Simulate(SimulateArgs),
    /// Report nodes, families, leaf flows, and flow-identity residuals
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProcedureName {
    Bonferroni,
    AdaptiveBonferroni,
    WeightedBonferroni,
    Bh,
    AdaptiveBh,
    WeightedBh,
    OracleBh,
    KfdrSingle,
    KfdrStepup,
    DagPfer,
    DagGels,
    DagBh,
}

impl ProcedureName {
    fn as_str(self) -> &'static str {
        match self {
            Self::Bonferroni => "bonferroni",
            Self::AdaptiveBonferroni => "adaptive-bonferroni",
            Self::WeightedBonferroni => "weighted-bonferroni",
            Self::Bh => "bh",
            Self::AdaptiveBh => "adaptive-bh",
            Self::WeightedBh => "weighted-bh",
            Self::OracleBh => "oracle-bh",
            Self::KfdrSingle => "kfdr-single",
            Self::KfdrStepup => "kfdr-stepup",
            Self::DagPfer => "dag-pfer",
            Self::DagGels => "dag-gels",
            Self::DagBh => "dag-bh",
        }
    }

    fn needs_dag(self) -> bool {
        matches!(self, Self::DagPfer | Self::DagGels | Self::DagBh)
    }
}

#[derive(Args)]
struct TestArgs {
    /// P-value file: one `id<TAB>value` line per hypothesis
    #[arg(long)]
    pvalues: PathBuf,
    /// Edge-list file: `parent<TAB>child` lines, `id<TAB>-` declares a node
    #[arg(long)]
    dag: Option<PathBuf>,
    #[arg(long, value_enum)]
    procedure: ProcedureName,
    /// Nominal error-rate level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Tuning parameter of the graph-aware thresholds [default: 2 * alpha
    /// for dag-gels, alpha / leaves for dag-pfer]
    #[arg(long)]
    lambda: Option<f64>,
    /// Tuning parameter of the true-null estimator (adaptive procedures)
    #[arg(long)]
    gamma: Option<f64>,
    /// Order of the generalized FDR (k-FDR procedures)
    #[arg(long)]
    k: Option<usize>,
    /// True-null count (oracle procedures)
    #[arg(long)]
    m0: Option<f64>,
    /// Weight file, `id<TAB>value`, for weighted procedures
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Write output here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON sweep configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the configured replication count
    #[arg(long)]
    reps: Option<usize>,
    /// Override the configured base seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    dag: PathBuf,
    /// Also write the graph back as a canonical edge-list file
    #[arg(long)]
    emit_edges: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Inspect(args) => cmd_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str, procedure: ProcedureName) -> Result<T, CliError> {
    value.ok_or_else(|| invalid(format!("procedure {} requires {flag}", procedure.as_str())))
}

struct TestOutcome {
    rejections: RejectionSet,
    thresholds: Vec<f64>,
    /// Effective lambda, where one participates in the thresholds.
    lambda: Option<f64>,
}

fn run_test_procedure(
    args: &TestArgs,
    p: &PValues,
    graph: Option<&(Dag, DagMetrics)>,
    weights: Option<&[f64]>,
) -> Result<TestOutcome, CliError> {
    let m = p.len();
    let mf = m as f64;
    let alpha = args.alpha;
    let uniform = |threshold: f64| vec![threshold.clamp(0.0, 1.0); m];

    let outcome = match args.procedure {
        ProcedureName::Bonferroni => TestOutcome {
            rejections: bonferroni(p, alpha, mf)?,
            thresholds: uniform(alpha / mf),
            lambda: None,
        },
        ProcedureName::AdaptiveBonferroni => {
            let gamma = require(args.gamma, "--gamma", args.procedure)?;
            let m0_hat = adaptive_m0(p, gamma)?;
            TestOutcome {
                rejections: bonferroni(p, alpha, m0_hat)?,
                thresholds: uniform(alpha / m0_hat),
                lambda: None,
            }
        }
        ProcedureName::WeightedBonferroni => {
            let weights = weights.expect("weights parsed for weighted procedures");
            TestOutcome {
                rejections: weighted_bonferroni(p, weights, alpha)?,
                thresholds: weights
                    .iter()
                    .map(|&w| (w * alpha / mf).clamp(0.0, 1.0))
                    .collect(),
                lambda: None,
            }
        }
        ProcedureName::Bh => {
            let rejections = bh_variant(p, alpha, BhMode::Plain)?;
            let level = rejections.count().max(1) as f64 * alpha;
            TestOutcome {
                thresholds: uniform(level / mf),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::AdaptiveBh => {
            let gamma = require(args.gamma, "--gamma", args.procedure)?;
            let m0_hat = adaptive_m0(p, gamma)?;
            let rejections = bh_variant(p, alpha, BhMode::Adaptive { gamma })?;
            let level = rejections.count().max(1) as f64 * alpha;
            TestOutcome {
                thresholds: uniform(level / m0_hat),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::WeightedBh => {
            let weights = weights.expect("weights parsed for weighted procedures");
            let rejections = bh_variant(p, alpha, BhMode::Weighted { weights })?;
            let sum: f64 = weights.iter().sum();
            let scale = if sum > 0.0 { mf / sum } else { 0.0 };
            let level = rejections.count().max(1) as f64 * alpha;
            TestOutcome {
                thresholds: weights
                    .iter()
                    .map(|&w| (w * scale * level / mf).clamp(0.0, 1.0))
                    .collect(),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::OracleBh => {
            let m0 = require(args.m0, "--m0", args.procedure)?;
            let rejections = bh_variant(p, alpha, BhMode::Oracle { m0 })?;
            let level = rejections.count().max(1) as f64 * alpha;
            TestOutcome {
                thresholds: uniform(level / m0),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::KfdrSingle => {
            let k = require(args.k, "--k", args.procedure)?;
            let rejections = kfdr_single_step(p, k, alpha)?;
            TestOutcome {
                thresholds: uniform(kfdr_threshold(m, k, alpha)),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::KfdrStepup => {
            let k = require(args.k, "--k", args.procedure)?;
            let rejections = kfdr_stepup(p, k, alpha)?;
            let level = k.max(rejections.count().max(1)) as f64 * alpha;
            TestOutcome {
                thresholds: uniform(kfdr_threshold(m, k, level)),
                rejections,
                lambda: None,
            }
        }
        ProcedureName::DagPfer => {
            let (dag, metrics) = graph.expect("graph parsed for graph procedures");
            let lambda = args
                .lambda
                .unwrap_or(alpha / metrics.leaf_count().max(1) as f64);
            let constants = dag_constants(metrics, alpha, ConstantsMode::PferLambda { lambda })?;
            TestOutcome {
                rejections: dag_test(dag, p, &constants)?,
                thresholds: constants.as_slice().to_vec(),
                lambda: Some(lambda),
            }
        }
        ProcedureName::DagGels => {
            let (dag, metrics) = graph.expect("graph parsed for graph procedures");
            let lambda = args.lambda.unwrap_or(2.0 * alpha);
            let run = dag_gels(dag, metrics, p, alpha, lambda)?;
            let constants =
                dag_constants(metrics, run.level, ConstantsMode::PferLambda { lambda })?;
            TestOutcome {
                rejections: run.rejections,
                thresholds: constants.as_slice().to_vec(),
                lambda: Some(lambda),
            }
        }
        ProcedureName::DagBh => {
            let (dag, _) = graph.expect("graph parsed for graph procedures");
            let run = dag_bh(dag, p, alpha)?;
            let level = run.level;
            TestOutcome {
                rejections: run.rejections,
                thresholds: uniform(level / mf),
                lambda: None,
            }
        }
    };
    Ok(outcome)
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let entries = parse_value_file(&args.pvalues, true)?;

    // With a graph: the p-value ids and node ids must match exactly, and the
    // node order of the graph file drives the output. Without one: file
    // order drives everything and the graph is edgeless by construction.
    let parsed_graph = match &args.dag {
        Some(path) => {
            let (table, dag) = parse_dag_file(path)?;
            Some((table, dag))
        }
        None => {
            if args.procedure.needs_dag() {
                return Err(invalid(format!(
                    "procedure {} requires --dag",
                    args.procedure.as_str()
                )));
            }
            None
        }
    };

    let (table, values, graph) = match parsed_graph {
        Some((table, dag)) => {
            let values = align_values(&args.pvalues, &entries, &table, "p-value")?;
            let metrics = DagMetrics::of(&dag);
            (table, values, Some((dag, metrics)))
        }
        None => {
            let ids: Vec<String> = entries.iter().map(|(id, _)| id.clone()).collect();
            let values: Vec<f64> = entries.iter().map(|(_, value)| *value).collect();
            (NodeTable::from_ids(&ids), values, None)
        }
    };

    let weights = match (&args.weights, args.procedure) {
        (_, ProcedureName::WeightedBonferroni | ProcedureName::WeightedBh) => {
            let path = args.weights.as_ref().ok_or_else(|| {
                invalid(format!(
                    "procedure {} requires --weights",
                    args.procedure.as_str()
                ))
            })?;
            let weight_entries = parse_value_file(path, false)?;
            Some(align_values(path, &weight_entries, &table, "weight")?)
        }
        (Some(_), _) => {
            return Err(invalid(format!(
                "--weights is not used by procedure {}",
                args.procedure.as_str()
            )))
        }
        _ => None,
    };

    let p = PValues::new(values)?;
    let m = p.len();

    let outcome = if m == 0 {
        TestOutcome {
            rejections: RejectionSet::none(0),
            thresholds: Vec::new(),
            lambda: args.lambda,
        }
    } else {
        run_test_procedure(&args, &p, graph.as_ref(), weights.as_deref())?
    };

    let mut summary = serde_json::Map::new();
    summary.insert("procedure".into(), args.procedure.as_str().into());
    summary.insert("alpha".into(), args.alpha.into());
    summary.insert(
        "lambda".into(),
        match outcome.lambda {
            Some(lambda) => lambda.into(),
            None => serde_json::Value::Null,
        },
    );
    summary.insert("m".into(), m.into());
    summary.insert("rejections".into(), outcome.rejections.count().into());
    if let Some(gamma) = args.gamma {
        summary.insert("gamma".into(), gamma.into());
    }
    if let Some(k) = args.k {
        summary.insert("k".into(), k.into());
    }
    if let Some(m0) = args.m0 {
        summary.insert("m0".into(), m0.into());
    }

    let mut out = open_output(args.out.as_ref())?;
    writeln!(out, "{}", serde_json::Value::Object(summary))
        .map_err(|error| CliError::Internal(error.to_string()))?;
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([
            "id",
            "p_value",
            "leaf_flow",
            "is_leaf",
            "threshold",
            "rejected",
        ])
        .map_err(|error| CliError::Internal(error.to_string()))?;
    for i in 0..m {
        let (leaf_flow, is_leaf) = match &graph {
            Some((_, metrics)) => (metrics.leaf_flow(i), metrics.is_leaf(i)),
            None => (1.0, true),
        };
        writer
            .write_record([
                table.id(i),
                &fmt_full(p.get(i)),
                &fmt_full(leaf_flow),
                if is_leaf { "true" } else { "false" },
                &fmt_full(outcome.thresholds[i]),
                if outcome.rejections.is_rejected(i) {
                    "true"
                } else {
                    "false"
                },
            ])
            .map_err(|error| CliError::Internal(error.to_string()))?;
    }
    writer
        .flush()
        .map_err(|error| CliError::Internal(error.to_string()))?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let text = read_text(&args.config)?;
    let sweep = SweepConfig::parse(&text)?;
    let cells = sweep.cells(args.reps, args.seed)?;

    let out = open_output(args.out.as_ref())?;
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([
            "rho",
            "pi",
            "lambda",
            "procedure",
            "replications",
            "fdr",
            "fdr_stderr",
            "power",
            "power_stderr",
        ])
        .map_err(|error| CliError::Internal(error.to_string()))?;
    for cell in &cells {
        let result = run_experiment(&cell.config)?;
        for estimate in &result.estimates {
            writer
                .write_record([
                    cell.rho.to_string(),
                    cell.pi.to_string(),
                    cell.lambda.to_string(),
                    estimate.procedure.name().to_string(),
                    estimate.replications.to_string(),
                    fmt_full(estimate.fdr_estimate),
                    fmt_full(estimate.fdr_stderr),
                    fmt_full(estimate.power_estimate),
                    fmt_full(estimate.power_stderr),
                ])
                .map_err(|error| CliError::Internal(error.to_string()))?;
        }
    }
    writer
        .flush()
        .map_err(|error| CliError::Internal(error.to_string()))?;
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let (table, dag) = parse_dag_file(&args.dag)?;
    let metrics = DagMetrics::of(&dag);
    let residuals = flow_identity_residuals(&dag, &metrics);

    if let Some(path) = &args.emit_edges {
        std::fs::write(path, emit_edges(&table, &dag))
            .map_err(|error| CliError::Internal(format!("{}: {error}", path.display())))?;
    }

    let nodes: Vec<serde_json::Value> = (0..dag.m())
        .map(|i| {
            serde_json::json!({
                "id": table.id(i),
                "family": metrics.family(i),
                "leaf_flow": metrics.leaf_flow(i),
                "is_leaf": metrics.is_leaf(i),
            })
        })
        .collect();
    let report = serde_json::json!({
        "m": dag.m(),
        "leaves": metrics.leaf_count(),
        "flow_conservation_residual": residuals.conservation,
        "flow_recurrence_residual": residuals.recurrence,
        "nodes": nodes,
    });

    let mut out = open_output(args.out.as_ref())?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report)
            .map_err(|error| CliError::Internal(error.to_string()))?
    )
    .map_err(|error| CliError::Internal(error.to_string()))?;
    Ok(())
}
