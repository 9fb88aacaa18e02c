//! Run manifest: everything needed to regenerate a classify run bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use eca_infodyn_core::classify::{EnsembleKind, ExperimentConfig};
use eca_infodyn_core::info::{BiasCorrection, TeConfig};
use eca_infodyn_core::seed::RNG_ALGORITHM;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub width: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub n_inputs: usize,
    pub k: usize,
    pub l: usize,
    pub bias_correction: String,
    pub master_seed: u64,
    pub input: String,
    /// Explicit rule list, or `None` for all 88 representatives.
    pub rules: Option<Vec<u8>>,
}

impl ConfigEcho {
    pub fn new(cfg: &ExperimentConfig, input: &str, rules: Option<Vec<u8>>) -> Self {
        Self {
            width: cfg.width,
            steps: cfg.steps,
            burn_in: cfg.burn_in,
            n_inputs: cfg.n_inputs,
            k: cfg.te.k,
            l: cfg.te.l,
            bias_correction: match cfg.te.bias_correction {
                BiasCorrection::None => "none".into(),
                BiasCorrection::MillerMadow => "miller-madow".into(),
            },
            master_seed: cfg.master_seed,
            input: input.to_string(),
            rules,
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let bias_correction = match self.bias_correction.as_str() {
            "none" => BiasCorrection::None,
            "miller-madow" => BiasCorrection::MillerMadow,
            other => anyhow::bail!("unknown bias correction {other:?} in manifest"),
        };
        let ensemble = match self.input.as_str() {
            "density" => EnsembleKind::StructuredDensity,
            _ => EnsembleKind::Random,
        };
        Ok(ExperimentConfig {
            width: self.width,
            steps: self.steps,
            burn_in: self.burn_in,
            n_inputs: self.n_inputs,
            te: TeConfig {
                k: self.k,
                l: self.l,
                bias_correction,
            },
            master_seed: self.master_seed,
            ensemble,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub rng_algorithm: String,
    pub seed_derivation: String,
    pub usable_samples_per_pair: usize,
    pub te_threshold_bits: Option<f64>,
    /// Representative -> per-input seeds, in input order.
    pub input_seeds: BTreeMap<u8, Vec<u64>>,
    pub threads: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Output file name -> SHA-256 hex digest.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: ConfigEcho, threads: usize) -> Self {
        let usable = config.steps - config.burn_in - config.k.max(config.l);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            seed_derivation: "seed = derive_seed(master_seed, representative, input_index, 0); \
                              derive_seed folds each coordinate into splitmix64"
                .to_string(),
            usable_samples_per_pair: usable,
            te_threshold_bits: None,
            input_seeds: BTreeMap::new(),
            threads,
            started_unix: unix_now(),
            finished_unix: 0,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        let digest = file_digest(&dir.join(name))?;
        self.outputs.insert(name.to_string(), digest);
        Ok(())
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.finished_unix = unix_now();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(dir.join(MANIFEST_FILE), text + "\n")
            .with_context(|| format!("writing manifest in {}", dir.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
