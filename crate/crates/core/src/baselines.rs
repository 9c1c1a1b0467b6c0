//! Reference mechanisms the quotation protocol is compared against.
//!
//! - DNR: nobody redeems, the server keeps everything for free.
//! - GDPR: every informed user redeems everything, no trade.
//! - BSP: the server posts a single price chosen to maximise its own payoff
//!   and buys (up to its demand) whatever users offer at that price.
//!
//! BSP searches a price grid against the realised population, i.e. the
//! server sees how users would respond before committing to a price.

use serde::{Deserialize, Serialize};

use crate::cost::CostParams;
use crate::engine::{self, Phase, QuotationConfig, RoundRecord, TradeOutcome};
use crate::error::{MarketError, Result};
use crate::metrics;
use crate::privacy::UserProfile;

/// Price grid searched by the single-price baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BspConfig {
    pub b_lo: f64,
    pub b_hi: f64,
    pub b_step: f64,
    /// Data grain for flooring offers.
    pub dd: f64,
}

impl BspConfig {
    /// Grid from the first quoted price to 1.2 times the dearest sell-all price
    /// among informed users, stepping by the quotation increment.
    pub fn for_population(users: &[UserProfile], cfg: &QuotationConfig) -> Result<Self> {
        let mut dearest: f64 = 0.0;
        for u in users.iter().filter(|u| u.informed && u.endowment > 0.0) {
            dearest = dearest.max(u.sell_all_price(0.0)?);
        }
        Ok(BspConfig {
            b_lo: cfg.b0,
            b_hi: (1.2 * dearest).max(cfg.b0),
            b_step: cfg.db,
            dd: cfg.dd,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_lo >= 0.0 && self.b_lo.is_finite()) {
            return Err(MarketError::field("bsp.b_lo", "must be finite and >= 0"));
        }
        if !(self.b_step > 0.0 && self.b_step.is_finite()) {
            return Err(MarketError::field("bsp.b_step", "must be finite and > 0"));
        }
        if !(self.dd > 0.0) {
            return Err(MarketError::field("bsp.dd", "must be > 0"));
        }
        if !(self.b_hi >= self.b_lo) {
            return Err(MarketError::EmptyGrid {
                lo: self.b_lo,
                hi: self.b_hi,
                step: self.b_step,
            });
        }
        Ok(())
    }

    /// Grid prices in ascending order.
    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        let slack = self.b_step * 1e-9;
        (0u64..)
            .map(|k| self.b_lo + k as f64 * self.b_step)
            .take_while(move |&p| p <= self.b_hi + slack)
    }
}

/// Nobody redeems: the server retains all data without paying.
pub fn run_dnr(_params: &CostParams, users: &[UserProfile]) -> TradeOutcome {
    TradeOutcome::untraded(users.iter().map(|u| u.endowment).collect())
}

/// Informed users redeem all their data; uninformed users' data stays.
pub fn run_gdpr(_params: &CostParams, users: &[UserProfile]) -> TradeOutcome {
    TradeOutcome::untraded(
        users
            .iter()
            .map(|u| if u.informed { 0.0 } else { u.endowment })
            .collect(),
    )
}

/// One trading round at the price `price`, with oversupply split smallest offers first.
fn single_price_round(
    params: &CostParams,
    users: &[UserProfile],
    target: f64,
    initial: f64,
    price: f64,
    dd: f64,
) -> Result<TradeOutcome> {
    let offers = users
        .iter()
        .map(|u| u.supply_grains(0.0, price, dd))
        .collect::<Result<Vec<u64>>>()?;
    let demand = params.demand_towards(target, initial, price);
    let total: u64 = offers.iter().sum();
    let bought = if total as f64 * dd <= demand {
        offers.clone()
    } else {
        engine::minor_first((demand / dd).floor() as u64, &offers)
    };
    let mut outcome = run_gdpr(params, users);
    for (i, &g) in bought.iter().enumerate() {
        if g > 0 {
            let amount = g as f64 * dd;
            outcome.sold[i] = amount;
            outcome.payments[i] = price * amount;
        }
    }
    outcome.rounds.push(RoundRecord {
        t: 0,
        price,
        demand,
        supplies: offers.iter().map(|&g| g as f64 * dd).collect(),
        allocations: bought.iter().map(|&g| g as f64 * dd).collect(),
        phase: Phase::Quotation,
    });
    outcome.terminal_phase = Some(Phase::Quotation);
    outcome.next_round = 1;
    Ok(outcome)
}

/// Single posted price maximising the server's payoff; ties go to the lower price.
pub fn run_bsp(
    params: &CostParams,
    users: &[UserProfile],
    cfg: &BspConfig,
) -> Result<TradeOutcome> {
    cfg.validate()?;
    engine::validate_market(params, users, cfg.dd)?;
    let target = params.optimal_retention()?;
    let initial: f64 = users
        .iter()
        .filter(|u| !u.informed)
        .map(|u| u.endowment)
        .sum();
    let mut best: Option<(f64, TradeOutcome)> = None;
    for price in cfg.prices() {
        let outcome = single_price_round(params, users, target, initial, price, cfg.dd)?;
        let payoff = metrics::server_payoff(params, &outcome)?;
        if best.as_ref().is_none_or(|(b, _)| payoff > *b) {
            best = Some((payoff, outcome));
        }
    }
    best.map(|(_, o)| o).ok_or(MarketError::EmptyGrid {
        lo: cfg.b_lo,
        hi: cfg.b_hi,
        step: cfg.b_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn population(lambda: f64, informed: usize) -> Vec<UserProfile> {
        (0..10)
            .map(|i| UserProfile::new(6000.0, lambda, i < informed))
            .collect()
    }

    #[test]
    fn dnr_keeps_everything() {
        let params = CostParams::reference(60000.0);
        for informed in [0, 10] {
            let out = run_dnr(&params, &population(15.0, informed));
            assert_eq!(out.total_retained(), 60000.0);
            assert_eq!(out.total_payment(), 0.0);
            assert!(out.rounds.is_empty());
        }
    }

    #[test]
    fn gdpr_redeems_informed_only() {
        let params = CostParams::reference(60000.0);
        assert_eq!(
            run_gdpr(&params, &population(15.0, 10)).total_retained(),
            0.0
        );
        assert_eq!(
            run_gdpr(&params, &population(15.0, 5)).total_retained(),
            30000.0
        );
        let users = population(15.0, 0);
        assert_eq!(run_gdpr(&params, &users), run_dnr(&params, &users));
    }

    #[test]
    fn grid_prices() {
        let cfg = BspConfig {
            b_lo: 0.001,
            b_hi: 0.005,
            b_step: 0.001,
            dd: 1.0,
        };
        assert_eq!(cfg.prices().count(), 5);
        let empty = BspConfig { b_hi: 0.0, ..cfg };
        assert!(matches!(
            run_bsp(
                &CostParams::reference(60000.0),
                &population(15.0, 10),
                &empty
            ),
            Err(MarketError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn default_grid_covers_dearest_seller() {
        let users = population(29.5, 10);
        let cfg = BspConfig::for_population(&users, &QuotationConfig::default()).unwrap();
        assert!((cfg.b_hi - 1.2 * 0.042_773_433_554_865_1).abs() < 1e-12);
        assert_eq!(cfg.b_lo, 0.001);
    }

    #[test]
    fn bsp_without_takers_matches_gdpr() {
        let params = CostParams::reference(60000.0);
        let users = population(29.5, 10);
        let cfg = BspConfig {
            b_lo: 0.0001,
            b_hi: 0.004,
            b_step: 0.0001,
            dd: 1.0,
        };
        let out = run_bsp(&params, &users, &cfg).unwrap();
        assert_eq!(out.sold, run_gdpr(&params, &users).sold);
        assert_eq!(out.total_payment(), 0.0);
        // every price ties at zero payoff, so the lowest wins
        assert_eq!(out.rounds[0].price, 0.0001);
    }

    #[test]
    fn bsp_buys_within_demand() {
        let params = CostParams::reference(60000.0);
        let users: Vec<_> = (0..10)
            .map(|i| UserProfile::new(6000.0, 0.5 + 3.0 * i as f64, true))
            .collect();
        let cfg = BspConfig::for_population(&users, &QuotationConfig::default()).unwrap();
        let out = run_bsp(&params, &users, &cfg).unwrap();
        let r = &out.rounds[0];
        assert!(r.purchased() <= r.demand);
        assert!(r.purchased() > 0.0);
        for (a, s) in r.allocations.iter().zip(&r.supplies) {
            assert!(a <= s);
        }
    }
}
