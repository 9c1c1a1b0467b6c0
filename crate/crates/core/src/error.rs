use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the market model, the quotation engine and the harness.
#[derive(Debug, Error)]
pub enum MarketError {
    /// An argument fell outside the domain of a model function.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A parameter set that makes a closed form undefined.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// The oversupply allocator was called without oversupply.
    #[error("no oversupply: total supply {supply} does not exceed demand {demand}")]
    NotOversupplied { supply: f64, demand: f64 },

    /// The engine exceeded its round cap.
    #[error("protocol did not terminate within {max_rounds} rounds")]
    RoundLimit { max_rounds: u64 },

    #[error("empty price grid [{lo}, {hi}] with step {step}")]
    EmptyGrid { lo: f64, hi: f64, step: f64 },

    /// An engine error annotated with the Monte Carlo run that produced it.
    #[error("run {run}: {source}")]
    Run {
        run: u64,
        #[source]
        source: Box<MarketError>,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MarketError {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        MarketError::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MarketError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            MarketError::Domain { .. } => "domain",
            MarketError::InvalidParams(_) => "invalid_params",
            MarketError::Validation { .. } => "validation",
            MarketError::NotOversupplied { .. } => "not_oversupplied",
            MarketError::RoundLimit { .. } => "round_limit",
            MarketError::EmptyGrid { .. } => "empty_grid",
            MarketError::Run { source, .. } => source.kind(),
            MarketError::Parse { .. } => "parse",
            MarketError::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, MarketError>;
