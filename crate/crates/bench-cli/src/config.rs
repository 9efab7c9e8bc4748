use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use svmpc::control::{MppiConfig, VariantName};
use svmpc::cost::CostSpec;
use svmpc::envs::EnvModel;
use svmpc::harness::{ControllerConfig, HarnessConfig, TrialConfig};
use svmpc::inference::SvgdConfig;

use crate::CliError;

/// Seeds for a batch: an explicit list, or `count` consecutive seeds from `base_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_count() -> usize {
    32
}

impl Default for BatchSpec {
    fn default() -> Self {
        BatchSpec {
            seeds: None,
            count: default_count(),
            base_seed: 0,
        }
    }
}

impl BatchSpec {
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.count as u64).map(|i| self.base_seed + i).collect(),
        }
    }
}

/// One experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub env: EnvModel,
    pub cost: CostSpec,
    pub controller: ControllerConfig,
    pub svgd: SvgdConfig,
    #[serde(default)]
    pub mppi: MppiConfig,
    pub harness: HarnessConfig,
    #[serde(default)]
    pub batch: BatchSpec,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.trial(0).validate().map_err(|e| match e {
            svmpc::Error::InvalidConfig { field, message } => CliError::Config(format!("{field}: {message}")),
            other => CliError::Config(other.to_string()),
        })?;
        if let Some(s) = &self.batch.seeds {
            if s.is_empty() {
                return Err(CliError::Config("batch.seeds: need at least one seed".into()));
            }
        } else if self.batch.count == 0 {
            return Err(CliError::Config("batch.count: need at least one seed".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment serializes to TOML")
    }

    /// Hex SHA-256 of the compact JSON form; field order is fixed by the
    /// struct layout, so equal documents hash equally.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("experiment serializes to JSON");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn trial(&self, seed: u64) -> TrialConfig {
        TrialConfig {
            env: self.env.clone(),
            cost: self.cost.clone(),
            controller: self.controller.clone(),
            svgd: self.svgd,
            mppi: self.mppi.clone(),
            harness: self.harness.clone(),
            seed,
        }
    }

    pub fn with_method(&self, method: VariantName) -> Self {
        let mut out = self.clone();
        out.controller.variant = method;
        out
    }
}
