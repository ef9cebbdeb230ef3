//! Versioned JSON configuration. Every structural problem is reported with
//! the JSON path of the offending field.

use std::path::Path;

use bregman_coherence::relaxed::SoftDivergenceSpec;
use bregman_coherence::{ConvexModelSet, GeneratorSpec, InvarianceMap, Model, PromptDistribution, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Project,
    #[serde(alias = "two_step")]
    TwoStep,
    Relaxed,
    Empirical,
    #[serde(alias = "verify-suite")]
    Verify,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    /// Prompt weights; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<PromptDistribution>,
    /// Invariance permutation; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<InvarianceMap>,
    #[serde(default)]
    pub set: ConvexModelSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Model>,
    /// Coherent reference model π* used for improvement checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed: Option<RelaxedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxedConfig {
    pub divergence: SoftDivergenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalConfig {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
    #[serde(default = "default_panel")]
    pub panel_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

fn default_panel() -> usize {
    16
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimax_m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

impl Config {
    /// A verify task with defaults, used when no config file is given.
    pub fn verify_only() -> Self {
        Self {
            version: SCHEMA_VERSION,
            task: Task::Verify,
            seed: None,
            generator: None,
            distribution: None,
            phi: None,
            set: ConvexModelSet::default(),
            baseline: None,
            reference: None,
            solver: None,
            relaxed: None,
            empirical: None,
            verify: Some(VerifyConfig::default()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        if cfg.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "at `version`: unsupported schema version {}, expected {SCHEMA_VERSION}",
                cfg.version
            )));
        }
        Ok(cfg)
    }
}

/// The validated numeric problem shared by the projection tasks.
pub struct Problem {
    pub gen: GeneratorSpec,
    pub dist: PromptDistribution,
    pub phi: InvarianceMap,
    pub set: ConvexModelSet,
    pub pi0: Model,
    pub reference: Option<Model>,
    pub solver: SolverOptions,
}

fn at(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("at `{path}`: {msg}"))
}

impl Problem {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let gen = cfg.generator.clone().ok_or_else(|| at("generator", "required for this task"))?;
        let pi0 = cfg.baseline.clone().ok_or_else(|| at("baseline", "required for this task"))?;
        let (n, d) = (pi0.n(), pi0.d());
        if let Some(gd) = gen.dim() {
            if gd != d {
                return Err(at("generator.matrix", format!("dimension {gd} does not match {d} outcomes")));
            }
        }
        let dist = match &cfg.distribution {
            Some(w) if w.len() != n => return Err(at("distribution", format!("{} weights for {n} prompts", w.len()))),
            Some(w) => w.clone(),
            None => PromptDistribution::uniform(n),
        };
        let phi = match &cfg.phi {
            Some(p) if p.len() != n => return Err(at("phi", format!("permutation of {} for {n} prompts", p.len()))),
            Some(p) => p.clone(),
            None => InvarianceMap::identity(n),
        };
        cfg.set.validate(n, d).map_err(|e| at("set", e))?;
        if let Some(r) = &cfg.reference {
            if r.n() != n || r.d() != d {
                return Err(at("reference", format!("shape {}x{} differs from baseline {n}x{d}", r.n(), r.d())));
            }
        }
        Ok(Self {
            gen,
            dist,
            phi,
            set: cfg.set.clone(),
            pi0,
            reference: cfg.reference.clone(),
            solver: cfg.solver.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_verify_config_parses() {
        let cfg = Config::parse(r#"{"version": 1, "task": "verify", "verify": {"suite": "minimax"}}"#).unwrap();
        assert_eq!(cfg.task, Task::Verify);
        assert_eq!(cfg.verify.unwrap().suite.as_deref(), Some("minimax"));
    }

    #[test]
    fn nested_error_names_its_path() {
        let err = Config::parse(r#"{"version": 1, "task": "project", "set": {"caps": [[0, 0, "x"]]}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("set.caps[0]"), "{msg}");
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        assert!(Config::parse(r#"{"version": 1, "task": "project", "bogus": 1}"#).is_err());
        let msg = Config::parse(r#"{"version": 2, "task": "project"}"#).unwrap_err().to_string();
        assert!(msg.contains("`version`"), "{msg}");
    }

    #[test]
    fn shape_mismatches_are_config_errors() {
        let cfg = Config::parse(
            r#"{"version": 1, "task": "project", "generator": {"kind": "squared_euclidean"},
                "baseline": [[0.5, 0.5], [0.2, 0.8]], "distribution": [1.0]}"#,
        )
        .unwrap();
        let msg = Problem::from_config(&cfg).err().unwrap().to_string();
        assert!(msg.contains("`distribution`"), "{msg}");
    }
}
