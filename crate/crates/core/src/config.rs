//! TOML experiment configuration.
//!
//! Every field is optional; omitted fields take the reference setup
//! (10 users of 6000 units, lambda ~ U(0.5, 29.5), 1000 runs, prices from
//! 0.001 in steps of 0.001). Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::CostParams;
use crate::engine::{OversupplyStrategy, QuotationConfig};
use crate::error::{MarketError, Result};
use crate::experiment::{ExperimentConfig, Mechanism};

/// Cost parameters as written in a config file; `d` is derived from the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSection {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub t0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        CostSection::from(CostParams::reference(0.0))
    }
}

impl From<CostParams> for CostSection {
    fn from(p: CostParams) -> Self {
        CostSection {
            a: p.a,
            a1: p.a1,
            a2: p.a2,
            a3: p.a3,
            t0: p.t0,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl CostSection {
    fn with_total(&self, d: f64) -> CostParams {
        CostParams {
            a: self.a,
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            t0: self.t0,
            alpha: self.alpha,
            beta: self.beta,
            d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Directory receiving CSV files.
    pub dir: String,
    /// Also write per-round traces.
    pub trace: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".into(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub n_users: usize,
    pub d_each: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub n_runs: u64,
    pub master_seed: u64,
    pub informed_ratio: f64,
    pub mechanism: Mechanism,
    pub strategy: OversupplyStrategy,
    pub quotation: QuotationConfig,
    pub cost: CostSection,
    pub output: OutputSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from_experiment(&ExperimentConfig::default(), OutputSection::default())
    }
}

impl ConfigFile {
    pub fn from_experiment(cfg: &ExperimentConfig, output: OutputSection) -> Self {
        ConfigFile {
            n_users: cfg.n_users,
            d_each: cfg.d_each,
            lambda_lo: cfg.lambda_lo,
            lambda_hi: cfg.lambda_hi,
            n_runs: cfg.n_runs,
            master_seed: cfg.master_seed,
            informed_ratio: cfg.informed_ratio,
            mechanism: cfg.mechanism,
            strategy: cfg.strategy,
            quotation: cfg.quotation,
            cost: CostSection::from(cfg.cost),
            output,
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            n_users: self.n_users,
            d_each: self.d_each,
            lambda_lo: self.lambda_lo,
            lambda_hi: self.lambda_hi,
            n_runs: self.n_runs,
            master_seed: self.master_seed,
            informed_ratio: self.informed_ratio,
            mechanism: self.mechanism,
            strategy: self.strategy,
            quotation: self.quotation,
            cost: self.cost.with_total(self.n_users as f64 * self.d_each),
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| MarketError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        file.experiment().validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| MarketError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ConfigFile::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Read and validate an experiment configuration.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(ConfigFile::load(path)?.experiment())
}
