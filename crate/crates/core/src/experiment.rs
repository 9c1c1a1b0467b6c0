//! Monte Carlo harness: population sampling, replication and aggregation.
//!
//! Every run draws a fresh population from its own random stream, keyed by
//! `(master_seed, run_index)`, so results do not depend on execution order
//! and all mechanisms evaluated at the same seed face the same users.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BspConfig};
use crate::cost::CostParams;
use crate::engine::{self, OversupplyStrategy, QuotationConfig, TradeOutcome};
use crate::error::{MarketError, Result};
use crate::metrics::{self, RunMetrics};
use crate::privacy::UserProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Quotation,
    Dnr,
    Gdpr,
    Bsp,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::Quotation,
        Mechanism::Dnr,
        Mechanism::Gdpr,
        Mechanism::Bsp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Quotation => "quotation",
            Mechanism::Dnr => "dnr",
            Mechanism::Gdpr => "gdpr",
            Mechanism::Bsp => "bsp",
        }
    }
}

impl std::str::FromStr for Mechanism {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                MarketError::field(
                    "mechanism",
                    format!("unknown mechanism `{s}` (quotation, dnr, gdpr, bsp)"),
                )
            })
    }
}

/// Everything needed to reproduce one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
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
    /// Cost parameters; `d` always equals `n_users * d_each`.
    pub cost: CostParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let n_users = 10;
        let d_each = 6000.0;
        ExperimentConfig {
            n_users,
            d_each,
            lambda_lo: 0.5,
            lambda_hi: 29.5,
            n_runs: 1000,
            master_seed: 20240601,
            informed_ratio: 1.0,
            mechanism: Mechanism::Quotation,
            strategy: OversupplyStrategy::MinorFirst,
            quotation: QuotationConfig::default(),
            cost: CostParams::reference(n_users as f64 * d_each),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(MarketError::field("n_users", "must be >= 1"));
        }
        if !(self.d_each >= 0.0 && self.d_each.is_finite()) {
            return Err(MarketError::field("d_each", "must be finite and >= 0"));
        }
        if !(self.lambda_lo > 0.0 && self.lambda_lo.is_finite()) {
            return Err(MarketError::field("lambda_lo", "must be finite and > 0"));
        }
        if !(self.lambda_hi >= self.lambda_lo && self.lambda_hi.is_finite()) {
            return Err(MarketError::field(
                "lambda_hi",
                "must be finite and >= lambda_lo",
            ));
        }
        if !(0.0..=1.0).contains(&self.informed_ratio) {
            return Err(MarketError::field("informed_ratio", "must lie in [0, 1]"));
        }
        self.quotation.validate()?;
        self.cost.validate().map_err(|e| match e {
            MarketError::Validation { field, reason } => {
                MarketError::field(format!("cost.{field}"), reason)
            }
            other => other,
        })?;
        let total = self.n_users as f64 * self.d_each;
        if (self.cost.d - total).abs() > 1e-9 * total.max(1.0) {
            return Err(MarketError::field(
                "cost.d",
                format!("{} differs from n_users * d_each = {total}", self.cost.d),
            ));
        }
        Ok(())
    }

    /// Number of informed users, `round(n_users * informed_ratio)` with halves rounded up.
    pub fn informed_count(&self) -> usize {
        ((self.n_users as f64 * self.informed_ratio + 0.5).floor() as usize).min(self.n_users)
    }

    /// Strategy label written next to results; baselines without oversupply have none.
    pub fn strategy_label(&self) -> &'static str {
        match self.mechanism {
            Mechanism::Quotation => self.strategy.as_str(),
            Mechanism::Bsp => OversupplyStrategy::MinorFirst.as_str(),
            Mechanism::Dnr | Mechanism::Gdpr => "none",
        }
    }
}

/// Random source for one run: stream `2 * run` draws the population,
/// stream `2 * run + 1` drives the mechanism.
fn run_streams(master_seed: u64, run_index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut population = ChaCha8Rng::seed_from_u64(master_seed);
    population.set_stream(2 * run_index);
    let mut mechanism = ChaCha8Rng::seed_from_u64(master_seed);
    mechanism.set_stream(2 * run_index + 1);
    (population, mechanism)
}

fn draw_population(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<UserProfile>> {
    let lambdas = Uniform::new_inclusive(cfg.lambda_lo, cfg.lambda_hi)
        .map_err(|e| MarketError::field("lambda_hi", e.to_string()))?;
    let informed = cfg.informed_count();
    Ok((0..cfg.n_users)
        .map(|i| UserProfile::new(cfg.d_each, lambdas.sample(rng), i < informed))
        .collect())
}

/// Population of run `run_index`; the first `informed_count` users are informed.
pub fn sample_population(cfg: &ExperimentConfig, run_index: u64) -> Result<Vec<UserProfile>> {
    let (mut rng, _) = run_streams(cfg.master_seed, run_index);
    draw_population(cfg, &mut rng)
}

/// One row of per-run results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run_id: u64,
    pub mechanism: Mechanism,
    pub informed_ratio: f64,
    pub strategy: &'static str,
    pub metrics: RunMetrics,
}

/// A simulated run together with its ledger and population.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub users: Vec<UserProfile>,
    pub outcome: TradeOutcome,
    pub row: ResultRow,
}

fn execute(
    cfg: &ExperimentConfig,
    users: &[UserProfile],
    rng: &mut ChaCha8Rng,
) -> Result<TradeOutcome> {
    match cfg.mechanism {
        Mechanism::Quotation => {
            engine::run_mechanism(&cfg.cost, users, &cfg.quotation, cfg.strategy, rng)
        }
        Mechanism::Dnr => Ok(baselines::run_dnr(&cfg.cost, users)),
        Mechanism::Gdpr => Ok(baselines::run_gdpr(&cfg.cost, users)),
        Mechanism::Bsp => {
            let grid = BspConfig::for_population(users, &cfg.quotation)?;
            baselines::run_bsp(&cfg.cost, users, &grid)
        }
    }
}

/// Simulate a single run with its full ledger.
pub fn simulate_run(cfg: &ExperimentConfig, run_index: u64) -> Result<RunRecord> {
    let annotate = |e: MarketError| MarketError::Run {
        run: run_index,
        source: Box::new(e),
    };
    let (mut pop_rng, mut rng) = run_streams(cfg.master_seed, run_index);
    let users = draw_population(cfg, &mut pop_rng).map_err(annotate)?;
    let outcome = execute(cfg, &users, &mut rng).map_err(annotate)?;
    let metrics = metrics::evaluate(&cfg.cost, &users, &outcome).map_err(annotate)?;
    Ok(RunRecord {
        users,
        outcome,
        row: ResultRow {
            run_id: run_index,
            mechanism: cfg.mechanism,
            informed_ratio: cfg.informed_ratio,
            strategy: cfg.strategy_label(),
            metrics,
        },
    })
}

/// All runs of an experiment with ledgers, in run-index order.
pub fn run_records(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    (0..cfg.n_runs)
        .into_par_iter()
        .map(|run| simulate_run(cfg, run))
        .collect()
}

/// Per-run metric rows in run-index order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    (0..cfg.n_runs)
        .into_par_iter()
        .map(|run| simulate_run(cfg, run).map(|r| r.row))
        .collect()
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }

    /// Standard error of the mean over `n` samples.
    pub fn std_error(&self, n: u64) -> f64 {
        self.std / (n as f64).sqrt()
    }
}

/// Metric names in the order they are aggregated and written.
pub const METRIC_NAMES: [&str; 6] = ["rounds", "y_final", "total_payment", "xi_s", "xi_u", "xi"];

fn metric_value(m: &RunMetrics, name: &str) -> f64 {
    match name {
        "rounds" => m.rounds as f64,
        "y_final" => m.y_final,
        "total_payment" => m.total_payment,
        "xi_s" => m.xi_s,
        "xi_u" => m.xi_u,
        "xi" => m.xi,
        _ => unreachable!("unknown metric {name}"),
    }
}

/// Aggregate of one (mechanism, ratio, strategy) experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub mechanism: Mechanism,
    pub informed_ratio: f64,
    pub strategy: &'static str,
    pub n: u64,
    /// Summaries keyed in [`METRIC_NAMES`] order.
    pub metrics: Vec<(&'static str, Summary)>,
}

impl AggregateResult {
    pub fn get(&self, name: &str) -> Summary {
        self.metrics
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, s)| *s)
            .unwrap_or_else(|| panic!("unknown metric {name}"))
    }
}

/// Aggregate rows that all come from one experiment configuration.
pub fn aggregate(cfg: &ExperimentConfig, rows: &[ResultRow]) -> AggregateResult {
    let metrics = METRIC_NAMES
        .iter()
        .map(|&name| {
            let values: Vec<f64> = rows
                .iter()
                .map(|r| metric_value(&r.metrics, name))
                .collect();
            (name, Summary::of(&values))
        })
        .collect();
    AggregateResult {
        mechanism: cfg.mechanism,
        informed_ratio: cfg.informed_ratio,
        strategy: cfg.strategy_label(),
        n: rows.len() as u64,
        metrics,
    }
}

/// Rows and aggregates of a multi-experiment study.
#[derive(Debug, Clone, Default)]
pub struct Study {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateResult>,
}

impl Study {
    fn push(&mut self, cfg: &ExperimentConfig, rows: Vec<ResultRow>) {
        self.aggregates.push(aggregate(cfg, &rows));
        self.rows.extend(rows);
    }

    pub fn find(&self, mechanism: Mechanism, ratio: f64) -> Option<&AggregateResult> {
        self.aggregates
            .iter()
            .find(|a| a.mechanism == mechanism && a.informed_ratio == ratio)
    }
}

/// Informed ratios 0, 0.1, ..., 1.0.
pub fn default_ratios() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// All four mechanisms at every ratio, sharing the master seed.
pub fn sweep_informed_ratio(cfg: &ExperimentConfig, ratios: &[f64]) -> Result<Study> {
    let mut study = Study::default();
    for &ratio in ratios {
        for mechanism in Mechanism::ALL {
            let point = ExperimentConfig {
                informed_ratio: ratio,
                mechanism,
                strategy: OversupplyStrategy::MinorFirst,
                ..cfg.clone()
            };
            let rows = run_experiment(&point)?;
            study.push(&point, rows);
        }
    }
    Ok(study)
}

/// The quotation mechanism under each oversupply strategy, sharing the master seed.
pub fn compare_strategies(cfg: &ExperimentConfig) -> Result<Study> {
    let mut study = Study::default();
    for strategy in OversupplyStrategy::ALL {
        let point = ExperimentConfig {
            mechanism: Mechanism::Quotation,
            strategy,
            ..cfg.clone()
        };
        let rows = run_experiment(&point)?;
        study.push(&point, rows);
    }
    Ok(study)
}
