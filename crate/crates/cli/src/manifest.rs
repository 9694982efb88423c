//! Run manifests: the effective configuration plus what each frame did.
//! A manifest is itself a valid `--config` argument.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swcs::config::ExperimentConfig;
use swcs::pipeline::FrameDiagnostics;

use crate::error::{read_to_string, CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    #[serde(flatten)]
    pub diagnostics: FrameDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub frame: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// SHA-256 of the `[config]` table as written below.
    pub config_hash: String,
    pub seed: u64,
    /// Noise level handed to the fidelity bound.
    #[serde(default)]
    pub noise_std: f64,
    /// Frames with image outputs.
    #[serde(default)]
    pub frames: Vec<usize>,
    pub config: ExperimentConfig,
    #[serde(default)]
    pub failures: Vec<FrameFailure>,
    #[serde(default)]
    pub diagnostics: Vec<FrameRecord>,
}

/// The config as echoed into manifests: no output path, so runs into
/// different directories agree byte for byte.
pub fn echo(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig { output: None, ..cfg.clone() }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(echo(cfg).to_toml_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            noise_std: 0.0,
            frames: Vec::new(),
            config: echo(cfg),
            failures: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = read_to_string(&path)?;
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e.message())))
    }

    pub fn expect_command(self, dir: &Path, command: &str) -> Result<Self> {
        if self.command != command {
            return Err(CliError::invalid(format!(
                "{} holds a `{}` run, expected `{command}`",
                dir.display(),
                self.command
            )));
        }
        Ok(self)
    }
}

/// If `text` is a manifest, the `[config]` table it carries.
pub fn embedded_config(text: &str) -> Option<String> {
    let table: toml::Table = text.parse().ok()?;
    if !table.get("command").is_some_and(|c| c.is_str()) {
        return None;
    }
    let config = table.get("config")?.as_table()?;
    Some(toml::to_string(config).expect("table serializes"))
}
