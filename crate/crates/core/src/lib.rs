//! Simulator of a quotation-based data retention market.
//!
//! A server that trains on user data faces a cost whenever users redeem
//! their data and force it to unlearn. Instead of unlearning, it can buy the
//! right to keep the data: it quotes an ascending series of unit prices and
//! users, each with a private valuation of their own privacy, decide how much
//! to sell at each price. The crate contains the cost and utility models, the
//! quotation protocol, three baseline mechanisms, payoff metrics, and a
//! seeded Monte Carlo harness with CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
pub mod cost;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod privacy;

pub use baselines::{run_bsp, run_dnr, run_gdpr, BspConfig};
pub use cost::{CostParams, MonotonicityCase};
pub use engine::{
    allocate_oversupply, run_mechanism, run_post_quotation_phase, run_quotation_phase,
    OversupplyStrategy, Phase, QuotationConfig, RoundRecord, TradeOutcome,
};
pub use error::{MarketError, Result};
pub use experiment::{
    AggregateResult, ExperimentConfig, Mechanism, ResultRow, RunRecord, Study, Summary,
};
pub use metrics::RunMetrics;
pub use privacy::UserProfile;
