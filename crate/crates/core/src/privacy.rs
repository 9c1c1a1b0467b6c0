//! User privacy utility and the greedy per-round supply response.
//!
//! A user holding `d_i` units values keeping `x` of them private at
//! `lambda_i * ln(x + 1)`. Written over the amount already sold `y_i`, the
//! utility is `lambda_i * ln(d_i - y_i + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    /// Data contributed by the user.
    pub endowment: f64,
    /// Privacy parameter `lambda_i > 0`.
    pub lambda: f64,
    /// Whether the user exercises redemption rights. Uninformed users
    /// never sell and never redeem.
    pub informed: bool,
}

impl UserProfile {
    pub fn new(endowment: f64, lambda: f64, informed: bool) -> Self {
        UserProfile {
            endowment,
            lambda,
            informed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.endowment >= 0.0 && self.endowment.is_finite()) {
            return Err(MarketError::field("endowment", "must be finite and >= 0"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(MarketError::field("lambda", "must be finite and > 0"));
        }
        Ok(())
    }

    fn check_sold(&self, op: &'static str, sold: f64) -> Result<()> {
        if !(0.0..=self.endowment).contains(&sold) {
            return Err(MarketError::domain(
                op,
                format!("sold amount {sold} outside [0, {}]", self.endowment),
            ));
        }
        Ok(())
    }

    /// Privacy utility after selling `sold` units.
    pub fn privacy_utility(&self, sold: f64) -> Result<f64> {
        self.check_sold("privacy_utility", sold)?;
        Ok(self.lambda * (self.endowment - sold + 1.0).ln())
    }

    /// Change of privacy utility from selling `extra` more units; never positive.
    pub fn delta_utility(&self, sold: f64, extra: f64) -> Result<f64> {
        self.check_sold("delta_utility", sold)?;
        let remaining = self.endowment - sold;
        if !(0.0..=remaining).contains(&extra) {
            return Err(MarketError::domain(
                "delta_utility",
                format!("extra sale {extra} outside [0, {remaining}]"),
            ));
        }
        Ok(self.lambda * (-extra / (remaining + 1.0)).ln_1p())
    }

    /// Lowest unit price that compensates the utility lost by selling `extra` more.
    pub fn min_price(&self, sold: f64, extra: f64) -> Result<f64> {
        self.check_sold("min_price", sold)?;
        let remaining = self.endowment - sold;
        if !(extra > 0.0 && extra <= remaining) {
            return Err(MarketError::domain(
                "min_price",
                format!("extra sale {extra} outside (0, {remaining}]"),
            ));
        }
        Ok(self.lambda / extra * (extra / (remaining + 1.0 - extra)).ln_1p())
    }

    /// Price at or below which the user sells nothing.
    pub fn participation_threshold(&self, sold: f64) -> Result<f64> {
        self.check_sold("participation_threshold", sold)?;
        Ok(self.lambda / (self.endowment - sold + 1.0))
    }

    /// Lowest unit price at which the user sells everything it still holds.
    pub fn sell_all_price(&self, sold: f64) -> Result<f64> {
        self.check_sold("sell_all_price", sold)?;
        let remaining = self.endowment - sold;
        if remaining <= 0.0 {
            return Err(MarketError::domain(
                "sell_all_price",
                "nothing left to sell",
            ));
        }
        Ok(self.lambda / remaining * remaining.ln_1p())
    }

    /// Greedy supply at `price`: the sale that maximises payment plus utility change.
    ///
    /// Indifference at zero quantity resolves to not selling.
    pub fn supply(&self, sold: f64, price: f64) -> Result<f64> {
        self.check_sold("supply", sold)?;
        if !(price >= 0.0) {
            return Err(MarketError::domain("supply", format!("price {price} < 0")));
        }
        if !self.informed || price == 0.0 {
            return Ok(0.0);
        }
        let remaining = self.endowment - sold;
        let optimum = remaining + 1.0 - self.lambda / price;
        Ok(optimum.clamp(0.0, remaining))
    }

    /// Supply rounded down to a multiple of the data grain `grain`.
    pub fn floored_supply(&self, sold: f64, price: f64, grain: f64) -> Result<f64> {
        Ok(self.supply_grains(sold, price, grain)? as f64 * grain)
    }

    /// Floored supply as a count of grains.
    pub(crate) fn supply_grains(&self, sold: f64, price: f64, grain: f64) -> Result<u64> {
        if !(grain > 0.0) {
            return Err(MarketError::domain(
                "floored_supply",
                format!("grain {grain} must be positive"),
            ));
        }
        let remaining = self.endowment - sold;
        let q = self.supply(sold, price)?;
        // Selling out exactly must not lose a grain to rounding of remaining/grain.
        if q >= remaining && remaining > 0.0 {
            return Ok(grains_in(remaining, grain));
        }
        Ok((q / grain).floor() as u64)
    }
}

/// Number of whole grains in an amount that is itself a grain multiple.
pub(crate) fn grains_in(amount: f64, grain: f64) -> u64 {
    (amount / grain).round() as u64
}
