//! The ascending quotation protocol.
//!
//! Each quotation round the server announces a unit price, computes its
//! demand at that price, and buys whatever the informed users offer (or its
//! demand, if they offer more). Prices rise by a fixed step until the server
//! no longer wants a whole grain of data. A post-quotation phase then keeps
//! raising the price without buying, and takes *all* remaining data in one
//! transaction if every holder is willing to sell out, exploiting the drop in
//! cost at full retention.
//!
//! All traded amounts are whole multiples of the data grain `dd`; they are
//! counted internally as integer grains.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostParams;
use crate::error::{MarketError, Result};
use crate::privacy::{grains_in, UserProfile};

/// Price schedule and data granularity of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuotationConfig {
    /// First quoted price.
    pub b0: f64,
    /// Price increment per round.
    pub db: f64,
    /// Data grain; every trade is a whole multiple of it.
    pub dd: f64,
    /// Cap on the price index across both phases.
    pub max_rounds: u64,
}

impl Default for QuotationConfig {
    fn default() -> Self {
        QuotationConfig {
            b0: 0.001,
            db: 0.001,
            dd: 1.0,
            max_rounds: 1_000_000,
        }
    }
}

impl QuotationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b0", self.b0), ("db", self.db), ("dd", self.dd)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MarketError::field(
                    format!("quotation.{name}"),
                    "must be finite and > 0",
                ));
            }
        }
        if self.max_rounds < 1 {
            return Err(MarketError::field("quotation.max_rounds", "must be >= 1"));
        }
        Ok(())
    }

    /// Price quoted in round `t`.
    pub fn price(&self, t: u64) -> f64 {
        self.b0 + t as f64 * self.db
    }
}

/// How the server splits its demand when users offer more than it wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OversupplyStrategy {
    /// Largest offers first.
    MajorFirst,
    /// Smallest offers first.
    MinorFirst,
    /// Pro rata to the offers.
    Proportional,
    /// Greedy over a uniformly random order.
    RandomOrder,
}

impl OversupplyStrategy {
    pub const ALL: [OversupplyStrategy; 4] = [
        OversupplyStrategy::MajorFirst,
        OversupplyStrategy::MinorFirst,
        OversupplyStrategy::Proportional,
        OversupplyStrategy::RandomOrder,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OversupplyStrategy::MajorFirst => "major-first",
            OversupplyStrategy::MinorFirst => "minor-first",
            OversupplyStrategy::Proportional => "proportional",
            OversupplyStrategy::RandomOrder => "random-order",
        }
    }
}

impl std::str::FromStr for OversupplyStrategy {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        OversupplyStrategy::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                MarketError::field(
                    "strategy",
                    format!("unknown strategy `{s}` (major-first, minor-first, proportional, random-order)"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Quotation,
    PostQuotation,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Quotation => "quotation",
            Phase::PostQuotation => "post-quotation",
        }
    }
}

/// One quoted price and what happened at it.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub price: f64,
    /// Server demand. In the post-quotation phase this is everything still held back.
    pub demand: f64,
    pub supplies: Vec<f64>,
    pub allocations: Vec<f64>,
    pub phase: Phase,
}

impl RoundRecord {
    pub fn total_supply(&self) -> f64 {
        self.supplies.iter().sum()
    }

    pub fn purchased(&self) -> f64 {
        self.allocations.iter().sum()
    }

    /// Users offered more than the server demanded.
    pub fn is_oversupplied(&self) -> bool {
        self.phase == Phase::Quotation && self.total_supply() > self.demand
    }
}

/// Ledger of a complete (or partially complete) run.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeOutcome {
    pub rounds: Vec<RoundRecord>,
    /// Per-user amount retained by the server at the end, `y_i^T`.
    pub sold: Vec<f64>,
    /// Per-user currency received.
    pub payments: Vec<f64>,
    /// Retention before any trade (uninformed users' data).
    pub initial_retained: f64,
    /// Phase that ended the run; `None` for mechanisms without rounds.
    pub terminal_phase: Option<Phase>,
    /// Index of the next price the server would quote.
    pub next_round: u64,
}

impl TradeOutcome {
    /// Outcome where nothing is traded and user `i` ends with `sold[i]` retained.
    pub(crate) fn untraded(sold: Vec<f64>) -> Self {
        let n = sold.len();
        let initial = sold.iter().sum();
        TradeOutcome {
            rounds: Vec::new(),
            sold,
            payments: vec![0.0; n],
            initial_retained: initial,
            terminal_phase: None,
            next_round: 0,
        }
    }

    pub fn total_retained(&self) -> f64 {
        self.sold.iter().sum()
    }

    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }
}

pub(crate) fn validate_market(
    params: &CostParams,
    users: &[UserProfile],
    grain: f64,
) -> Result<()> {
    params.validate()?;
    let mut total = 0.0;
    for (i, u) in users.iter().enumerate() {
        u.validate()
            .map_err(|e| MarketError::field(format!("users[{i}]"), e.to_string()))?;
        let grains = u.endowment / grain;
        if (grains - grains.round()).abs() > 1e-9 * grains.max(1.0) {
            return Err(MarketError::field(
                format!("users[{i}].endowment"),
                format!(
                    "{} is not a multiple of the data grain {grain}",
                    u.endowment
                ),
            ));
        }
        total += u.endowment;
    }
    if (total - params.d).abs() > 1e-9 * params.d.max(1.0) {
        return Err(MarketError::field(
            "cost.d",
            format!("{} differs from total endowment {total}", params.d),
        ));
    }
    Ok(())
}

fn fill_in_order(order: &[usize], mut wanted: u64, supplies: &[u64]) -> Vec<u64> {
    let mut out = vec![0; supplies.len()];
    for &i in order {
        if wanted == 0 {
            break;
        }
        let take = supplies[i].min(wanted);
        out[i] = take;
        wanted -= take;
    }
    out
}

/// Greedy fill in ascending order of offers.
pub(crate) fn minor_first(wanted: u64, supplies: &[u64]) -> Vec<u64> {
    fill_in_order(&ascending_order(supplies), wanted, supplies)
}

fn ascending_order(supplies: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..supplies.len()).collect();
    order.sort_by_key(|&i| (supplies[i], i));
    order
}

/// Split `wanted` grains among `supplies`, which must total more than `wanted`.
pub(crate) fn allocate_grains<R: Rng + ?Sized>(
    wanted: u64,
    supplies: &[u64],
    strategy: OversupplyStrategy,
    rng: &mut R,
) -> Vec<u64> {
    match strategy {
        OversupplyStrategy::MajorFirst => {
            let mut order: Vec<usize> = (0..supplies.len()).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(supplies[i]), i));
            fill_in_order(&order, wanted, supplies)
        }
        OversupplyStrategy::MinorFirst => minor_first(wanted, supplies),
        OversupplyStrategy::Proportional => {
            let total: u128 = supplies.iter().map(|&q| q as u128).sum();
            let mut out: Vec<u64> = supplies
                .iter()
                .map(|&q| (wanted as u128 * q as u128 / total) as u64)
                .collect();
            let mut left = wanted - out.iter().sum::<u64>();
            let order = ascending_order(supplies);
            while left > 0 {
                for &i in &order {
                    if left == 0 {
                        break;
                    }
                    if out[i] < supplies[i] {
                        out[i] += 1;
                        left -= 1;
                    }
                }
            }
            out
        }
        OversupplyStrategy::RandomOrder => {
            let mut order: Vec<usize> = (0..supplies.len()).collect();
            order.shuffle(rng);
            fill_in_order(&order, wanted, supplies)
        }
    }
}

/// Split demand `demand` among oversupplied offers, in units of `grain`.
///
/// The allocations sum to `floor(demand / grain) * grain` and never exceed
/// any user's offer. Equal offers are ordered by user index.
pub fn allocate_oversupply<R: Rng + ?Sized>(
    demand: f64,
    supplies: &[f64],
    strategy: OversupplyStrategy,
    grain: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(grain > 0.0) {
        return Err(MarketError::domain(
            "allocate_oversupply",
            "grain must be positive",
        ));
    }
    if !(demand >= 0.0) {
        return Err(MarketError::domain(
            "allocate_oversupply",
            "demand must be >= 0",
        ));
    }
    let total: f64 = supplies.iter().sum();
    if total <= demand {
        return Err(MarketError::NotOversupplied {
            supply: total,
            demand,
        });
    }
    let offers: Vec<u64> = supplies.iter().map(|&q| grains_in(q, grain)).collect();
    let wanted = (demand / grain).floor() as u64;
    Ok(allocate_grains(wanted, &offers, strategy, rng)
        .into_iter()
        .map(|g| g as f64 * grain)
        .collect())
}

/// Working state of a run, with holdings kept in grains for informed users.
struct Ledger<'a> {
    users: &'a [UserProfile],
    cfg: &'a QuotationConfig,
    sold_grains: Vec<u64>,
    payments: Vec<f64>,
    rounds: Vec<RoundRecord>,
    initial_retained: f64,
    t: u64,
}

impl<'a> Ledger<'a> {
    fn fresh(users: &'a [UserProfile], cfg: &'a QuotationConfig) -> Self {
        let sold_grains = users
            .iter()
            .map(|u| {
                if u.informed {
                    0
                } else {
                    grains_in(u.endowment, cfg.dd)
                }
            })
            .collect();
        let n = users.len();
        let mut ledger = Ledger {
            users,
            cfg,
            sold_grains,
            payments: vec![0.0; n],
            rounds: Vec::new(),
            initial_retained: 0.0,
            t: 0,
        };
        ledger.initial_retained = ledger.retained();
        ledger
    }

    fn resume(users: &'a [UserProfile], cfg: &'a QuotationConfig, state: TradeOutcome) -> Self {
        Ledger {
            users,
            cfg,
            sold_grains: state.sold.iter().map(|&s| grains_in(s, cfg.dd)).collect(),
            payments: state.payments,
            rounds: state.rounds,
            initial_retained: state.initial_retained,
            t: state.next_round,
        }
    }

    fn sold(&self, i: usize) -> f64 {
        if self.users[i].informed {
            self.sold_grains[i] as f64 * self.cfg.dd
        } else {
            self.users[i].endowment
        }
    }

    fn retained(&self) -> f64 {
        (0..self.users.len()).map(|i| self.sold(i)).sum()
    }

    fn remaining_grains(&self, i: usize) -> u64 {
        grains_in(self.users[i].endowment, self.cfg.dd) - self.sold_grains[i]
    }

    fn offers(&self, price: f64) -> Result<Vec<u64>> {
        self.users
            .iter()
            .enumerate()
            .map(|(i, u)| {
                if !u.informed {
                    return Ok(0);
                }
                let q = u.supply_grains(self.sold(i), price, self.cfg.dd)?;
                Ok(q.min(self.remaining_grains(i)))
            })
            .collect()
    }

    fn check_round_cap(&self) -> Result<()> {
        if self.t >= self.cfg.max_rounds {
            return Err(MarketError::RoundLimit {
                max_rounds: self.cfg.max_rounds,
            });
        }
        Ok(())
    }

    fn execute(&mut self, price: f64, demand: f64, offers: &[u64], bought: &[u64], phase: Phase) {
        let dd = self.cfg.dd;
        for (i, &g) in bought.iter().enumerate() {
            self.sold_grains[i] += g;
            self.payments[i] += price * (g as f64 * dd);
        }
        self.rounds.push(RoundRecord {
            t: self.t,
            price,
            demand,
            supplies: offers.iter().map(|&g| g as f64 * dd).collect(),
            allocations: bought.iter().map(|&g| g as f64 * dd).collect(),
            phase,
        });
        self.t += 1;
    }

    fn finish(self, terminal_phase: Phase) -> TradeOutcome {
        let sold = (0..self.users.len()).map(|i| self.sold(i)).collect();
        TradeOutcome {
            rounds: self.rounds,
            sold,
            payments: self.payments,
            initial_retained: self.initial_retained,
            terminal_phase: Some(terminal_phase),
            next_round: self.t,
        }
    }
}

/// Run ascending quotation rounds until the server's demand drops below one grain.
pub fn run_quotation_phase<R: Rng + ?Sized>(
    params: &CostParams,
    users: &[UserProfile],
    cfg: &QuotationConfig,
    strategy: OversupplyStrategy,
    rng: &mut R,
) -> Result<TradeOutcome> {
    cfg.validate()?;
    validate_market(params, users, cfg.dd)?;
    let target = params.optimal_retention()?;
    let mut ledger = Ledger::fresh(users, cfg);
    loop {
        let price = cfg.price(ledger.t);
        let demand = params.demand_towards(target, ledger.retained(), price);
        if demand < cfg.dd {
            break;
        }
        ledger.check_round_cap()?;
        let offers = ledger.offers(price)?;
        let total: u64 = offers.iter().sum();
        let bought = if total as f64 * cfg.dd <= demand {
            offers.clone()
        } else {
            allocate_grains((demand / cfg.dd).floor() as u64, &offers, strategy, rng)
        };
        ledger.execute(price, demand, &offers, &bought, Phase::Quotation);
    }
    Ok(ledger.finish(Phase::Quotation))
}

/// Keep quoting without buying; take all remaining data once every holder sells out.
///
/// Stops at the first such purchase, or once buying everything at the quoted
/// price would cost more than the jump in unlearning cost it saves.
pub fn run_post_quotation_phase(
    params: &CostParams,
    users: &[UserProfile],
    cfg: &QuotationConfig,
    state: TradeOutcome,
) -> Result<TradeOutcome> {
    cfg.validate()?;
    validate_market(params, users, cfg.dd)?;
    if state.sold.len() != users.len() || state.payments.len() != users.len() {
        return Err(MarketError::domain(
            "run_post_quotation_phase",
            "state does not match the user list",
        ));
    }
    let entry_phase = state.terminal_phase.unwrap_or(Phase::Quotation);
    let mut ledger = Ledger::resume(users, cfg, state);
    let full_cost = params.retention_cost(params.d)?;
    if (0..users.len()).all(|i| ledger.remaining_grains(i) == 0) {
        return Ok(ledger.finish(entry_phase));
    }
    let mut phase = entry_phase;
    loop {
        let price = cfg.price(ledger.t);
        let retained = ledger.retained();
        let outstanding = params.d - retained;
        if price * outstanding > params.retention_cost(retained)? - full_cost {
            break;
        }
        ledger.check_round_cap()?;
        phase = Phase::PostQuotation;
        let offers = ledger.offers(price)?;
        let sells_out = (0..users.len()).all(|i| offers[i] == ledger.remaining_grains(i));
        if sells_out {
            ledger.execute(price, outstanding, &offers, &offers, Phase::PostQuotation);
            break;
        }
        let none = vec![0; users.len()];
        ledger.execute(price, outstanding, &offers, &none, Phase::PostQuotation);
    }
    Ok(ledger.finish(phase))
}

/// Both phases of the protocol.
pub fn run_mechanism<R: Rng + ?Sized>(
    params: &CostParams,
    users: &[UserProfile],
    cfg: &QuotationConfig,
    strategy: OversupplyStrategy,
    rng: &mut R,
) -> Result<TradeOutcome> {
    let state = run_quotation_phase(params, users, cfg, strategy, rng)?;
    run_post_quotation_phase(params, users, cfg, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn alloc(demand: f64, supplies: &[f64], s: OversupplyStrategy) -> Vec<f64> {
        allocate_oversupply(demand, supplies, s, 1.0, &mut rng()).unwrap()
    }

    #[test]
    fn allocation_examples() {
        let q = [7.0, 5.0, 3.0];
        assert_eq!(
            alloc(10.0, &q, OversupplyStrategy::MajorFirst),
            vec![7.0, 3.0, 0.0]
        );
        assert_eq!(
            alloc(10.0, &q, OversupplyStrategy::MinorFirst),
            vec![2.0, 5.0, 3.0]
        );
        assert_eq!(
            alloc(10.0, &q, OversupplyStrategy::Proportional),
            vec![4.0, 3.0, 3.0]
        );
        let r = alloc(10.0, &q, OversupplyStrategy::RandomOrder);
        assert_eq!(r.iter().sum::<f64>(), 10.0);
        for s in OversupplyStrategy::ALL {
            assert!(matches!(
                allocate_oversupply(15.0, &q, s, 1.0, &mut rng()),
                Err(MarketError::NotOversupplied { .. })
            ));
        }
    }

    #[test]
    fn allocation_ties_follow_index() {
        let q = [4.0, 4.0, 4.0];
        assert_eq!(
            alloc(5.0, &q, OversupplyStrategy::MajorFirst),
            vec![4.0, 1.0, 0.0]
        );
        assert_eq!(
            alloc(5.0, &q, OversupplyStrategy::MinorFirst),
            vec![4.0, 1.0, 0.0]
        );
        assert_eq!(
            alloc(5.0, &q, OversupplyStrategy::Proportional),
            vec![2.0, 2.0, 1.0]
        );
    }

    #[test]
    fn allocation_floors_fractional_demand() {
        let got = allocate_oversupply(
            7.9,
            &[6.0, 6.0],
            OversupplyStrategy::MinorFirst,
            2.0,
            &mut rng(),
        )
        .unwrap();
        assert_eq!(got, vec![6.0, 0.0]);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in OversupplyStrategy::ALL {
            assert_eq!(s.as_str().parse::<OversupplyStrategy>().unwrap(), s);
        }
        assert!("biggest".parse::<OversupplyStrategy>().is_err());
    }

    fn table_market(lambdas: &[f64]) -> (CostParams, Vec<UserProfile>) {
        let users: Vec<_> = lambdas
            .iter()
            .map(|&l| UserProfile::new(6000.0, l, true))
            .collect();
        (CostParams::reference(6000.0 * users.len() as f64), users)
    }

    #[test]
    fn prohibitive_privacy_means_no_trade() {
        let (params, users) = table_market(&[220.0; 10]);
        let cfg = QuotationConfig::default();
        let out = run_mechanism(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        assert!(out.rounds.iter().all(|r| r.purchased() == 0.0));
        assert_eq!(out.total_retained(), 0.0);
        assert_eq!(out.total_payment(), 0.0);
        // demand at y = 0 vanishes once beta*T0 + B exceeds 0.005 e^2
        let last = out.rounds.last().unwrap();
        assert!(last.price < 0.005 * std::f64::consts::E.powi(2) - 2.85e-4);
        assert!(
            cfg.price(out.rounds.len() as u64) + 2.85e-4 >= 0.005 * std::f64::consts::E.powi(2)
        );
    }

    #[test]
    fn server_wanting_nothing_yields_empty_ledger() {
        let (mut params, users) = table_market(&[1.0, 2.0]);
        params.alpha = 0.0;
        let out = run_mechanism(
            &params,
            &users,
            &QuotationConfig::default(),
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        assert!(out.rounds.is_empty());
        assert_eq!(out.total_retained(), 0.0);
    }

    #[test]
    fn uninformed_population_is_untouched() {
        let users = vec![UserProfile::new(6000.0, 3.0, false); 10];
        let params = CostParams::reference(60000.0);
        let out = run_mechanism(
            &params,
            &users,
            &QuotationConfig::default(),
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        assert!(out.rounds.is_empty());
        assert_eq!(out.total_retained(), 60000.0);
        assert_eq!(out.total_payment(), 0.0);
    }

    #[test]
    fn single_cheap_seller_sells_every_round() {
        let (params, users) = table_market(&[0.5]);
        let cfg = QuotationConfig::default();
        let out = run_mechanism(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        let quoted: Vec<_> = out
            .rounds
            .iter()
            .filter(|r| r.phase == Phase::Quotation)
            .collect();
        assert!(!quoted.is_empty());
        // the threshold 0.5/6001 is below the first price, so every round trades
        assert!(quoted.iter().all(|r| r.purchased() > 0.0));
        // the quotation ends on the server's side, with data still held back
        let held = out.total_retained();
        assert!(held < 6000.0);
        assert!(params.demand(held, cfg.price(quoted.len() as u64)).unwrap() < cfg.dd);
    }

    #[test]
    fn round_cap_is_an_error() {
        let (params, users) = table_market(&[15.0, 20.0]);
        let cfg = QuotationConfig {
            max_rounds: 2,
            ..QuotationConfig::default()
        };
        let err = run_mechanism(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap_err();
        assert!(matches!(err, MarketError::RoundLimit { max_rounds: 2 }));
    }

    #[test]
    fn endowment_mismatch_rejected() {
        let (mut params, users) = table_market(&[1.0]);
        params.d = 5000.0;
        assert!(run_mechanism(
            &params,
            &users,
            &QuotationConfig::default(),
            OversupplyStrategy::MinorFirst,
            &mut rng()
        )
        .is_err());
    }

    #[test]
    fn post_quotation_skipped_when_everything_retained() {
        let (params, users) = table_market(&[0.001]);
        let cfg = QuotationConfig::default();
        let state = run_quotation_phase(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        assert_eq!(state.total_retained(), 6000.0);
        let before = state.clone();
        let after = run_post_quotation_phase(&params, &users, &cfg, state).unwrap();
        assert_eq!(after, before);
    }

    /// A market where the quotation phase stops at an interior target below `d`.
    fn interior_market(lambda: f64) -> (CostParams, Vec<UserProfile>, QuotationConfig) {
        let mut params = CostParams::reference(6000.0);
        // y_max = 3000 exactly: slope zero where 0.005 e^(A2 (d - y)) = beta*T0
        params.beta = 0.005 * (params.a2 * 3000.0).exp() / params.t0;
        let users = vec![UserProfile::new(6000.0, lambda, true)];
        (params, users, QuotationConfig::default())
    }

    #[test]
    fn post_quotation_full_purchase_for_cheap_holdout() {
        let (params, users, cfg) = interior_market(0.001);
        let target = params.optimal_retention().unwrap();
        assert!((target - 3000.0).abs() < 1e-6);
        let state = run_quotation_phase(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        let pre = state.total_retained();
        assert!(pre < 6000.0);
        let quoted = state.rounds.len();
        let out = run_post_quotation_phase(&params, &users, &cfg, state).unwrap();
        assert_eq!(out.terminal_phase, Some(Phase::PostQuotation));
        assert_eq!(out.total_retained(), 6000.0);
        assert_eq!(out.rounds.len(), quoted + 1);
        let last = out.rounds.last().unwrap();
        assert_eq!(last.phase, Phase::PostQuotation);
        assert_eq!(last.purchased(), 6000.0 - pre);
        let saving = params.retention_cost(pre).unwrap() - params.retention_cost(6000.0).unwrap();
        assert!(last.price * (6000.0 - pre) <= saving);
    }

    #[test]
    fn post_quotation_gives_up_on_expensive_holdout() {
        let (params, users, cfg) = interior_market(2.0);
        let state = run_quotation_phase(
            &params,
            &users,
            &cfg,
            OversupplyStrategy::MinorFirst,
            &mut rng(),
        )
        .unwrap();
        let pre = state.total_retained();
        assert!(pre < 6000.0);
        let saving = params.retention_cost(pre).unwrap() - params.retention_cost(6000.0).unwrap();
        let remaining = 6000.0 - pre;
        // greedy supply covers the whole holding only once the price reaches lambda
        assert!(users[0].lambda > saving / remaining);
        let out = run_post_quotation_phase(&params, &users, &cfg, state).unwrap();
        assert_eq!(out.total_retained(), pre);
        let post: Vec<_> = out
            .rounds
            .iter()
            .filter(|r| r.phase == Phase::PostQuotation)
            .collect();
        assert!(!post.is_empty());
        assert!(post.iter().all(|r| r.purchased() == 0.0));
        let next = cfg.price(out.next_round);
        assert!(next * remaining > saving);
    }
}
