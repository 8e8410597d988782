//! The JSON sweep configuration consumed by `simulate`.
//!
//! The file describes a grid: every combination of `rho`, `pi`, and `lambda`
//! becomes one experiment cell, each with its own derived seed. Unknown
//! fields are errors, and the `schema` field is checked so stale configs
//! fail fast instead of silently running the wrong study.

use serde::Deserialize;

use dagfdr::sim::{derive_seed, Procedure, SimulationConfig};

use crate::formats::{invalid, CliError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: u32,
    #[serde(default = "default_layer_widths")]
    pub layer_widths: Vec<usize>,
    #[serde(default = "default_mu")]
    pub mu: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_lambda")]
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
    pub pi: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub fixed_truth: bool,
    #[serde(default = "default_procedures")]
    pub procedures: Vec<String>,
}

fn default_layer_widths() -> Vec<usize> {
    vec![1000, 1001, 1002]
}

fn default_mu() -> Vec<f64> {
    vec![3.0, 2.0, 1.0]
}

fn default_alpha() -> f64 {
    0.05
}

fn default_lambda() -> Vec<f64> {
    vec![0.1]
}

fn default_procedures() -> Vec<String> {
    vec!["dag-gels".into(), "dag-bh".into(), "bh".into()]
}

fn parse_procedure(name: &str) -> Result<Procedure, CliError> {
    match name {
        "dag-gels" => Ok(Procedure::DagGels),
        "dag-bh" => Ok(Procedure::DagBh),
        "bh" => Ok(Procedure::Bh),
        other => Err(invalid(format!(
            "config error at procedures: unknown procedure '{other}' \
             (expected dag-gels, dag-bh, or bh)"
        ))),
    }
}

/// One cell of the sweep, in row-major grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub rho: f64,
    pub pi: f64,
    pub lambda: f64,
    pub config: SimulationConfig,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut deserializer = serde_json::Deserializer::from_str(text);
        let config: SweepConfig =
            serde_path_to_error::deserialize(&mut deserializer).map_err(|error| {
                invalid(format!(
                    "config error at {}: {}",
                    error.path(),
                    error.inner()
                ))
            })?;
        if config.schema != 1 {
            return Err(invalid(format!(
                "config error at schema: unsupported version {} (expected 1)",
                config.schema
            )));
        }
        if config.rho.is_empty() || config.pi.is_empty() || config.lambda.is_empty() {
            return Err(invalid(
                "config error: rho, pi, and lambda must each list at least one value",
            ));
        }
        Ok(config)
    }

    /// Expands the grid. Each cell gets an independent seed derived from the
    /// base seed and its position, so adding a grid point never reshuffles
    /// the others.
    pub fn cells(
        &self,
        replications_override: Option<usize>,
        seed_override: Option<u64>,
    ) -> Result<Vec<SweepCell>, CliError> {
        let procedures = self
            .procedures
            .iter()
            .map(|name| parse_procedure(name))
            .collect::<Result<Vec<_>, _>>()?;
        let base_seed = seed_override.unwrap_or(self.seed);
        let replications = replications_override.unwrap_or(self.replications);
        let mut cells = Vec::new();
        let mut index = 0u64;
        for &rho in &self.rho {
            for &pi in &self.pi {
                for &lambda in &self.lambda {
                    cells.push(SweepCell {
                        rho,
                        pi,
                        lambda,
                        config: SimulationConfig {
                            layer_widths: self.layer_widths.clone(),
                            leaf_null_proportion: pi,
                            rho,
                            mu_by_layer: self.mu.clone(),
                            alpha: self.alpha,
                            lambda,
                            replications,
                            seed: derive_seed(base_seed, index),
                            fixed_truth: self.fixed_truth,
                            procedures: procedures.clone(),
                        },
                    });
                    index += 1;
                }
            }
        }
        Ok(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "rho": [0.0, 0.3],
        "pi": [0.5],
        "replications": 10,
        "seed": 7
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let config = SweepConfig::parse(MINIMAL).unwrap();
        assert_eq!(config.layer_widths, vec![1000, 1001, 1002]);
        assert_eq!(config.alpha, 0.05);
        assert_eq!(config.lambda, vec![0.1]);
        assert!(!config.fixed_truth);
        let cells = config.cells(None, None).unwrap();
        assert_eq!(cells.len(), 2);
        assert_ne!(cells[0].config.seed, cells[1].config.seed);
    }

    #[test]
    fn unknown_field_names_path() {
        let err = SweepConfig::parse(r#"{"schema": 1, "rho": [0], "pi": [0.5], "replications": 1, "seed": 1, "turbo": true}"#)
            .unwrap_err();
        assert!(err.to_string().contains("turbo"), "{err}");
    }

    #[test]
    fn nested_type_error_names_path() {
        let err = SweepConfig::parse(
            r#"{"schema": 1, "rho": [0, "zero"], "pi": [0.5], "replications": 1, "seed": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("rho[1]"), "{err}");
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let err = SweepConfig::parse(
            r#"{"schema": 2, "rho": [0], "pi": [0.5], "replications": 1, "seed": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("schema"), "{err}");
    }

    #[test]
    fn unknown_procedure_rejected() {
        let text = r#"{"schema": 1, "rho": [0], "pi": [0.5], "replications": 1, "seed": 1,
                       "procedures": ["bh", "bonferroni-stepdown"]}"#;
        let config = SweepConfig::parse(text).unwrap();
        assert!(config.cells(None, None).is_err());
    }

    #[test]
    fn overrides_apply() {
        let config = SweepConfig::parse(MINIMAL).unwrap();
        let cells = config.cells(Some(3), Some(99)).unwrap();
        assert_eq!(cells[0].config.replications, 3);
        assert_eq!(cells[0].config.seed, derive_seed(99, 0));
    }
}
