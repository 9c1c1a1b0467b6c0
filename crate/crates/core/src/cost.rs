//! Server-side unlearning cost.
//!
//! The server holds `d` units of user data in total. Redeeming `x` units
//! degrades model accuracy by `A(x) = A1 * a^(A2 x) - A3` and costs
//! `T(x) = T0 (d - x)` of compute time (zero when nothing is redeemed).
//! Everything downstream works in terms of the retained amount `y = d - x`,
//! for which
//!
//! ```text
//! C(y) = alpha * (A1 * a^(A2 (d - y)) - A3) + beta * T0 * y    for y in [0, d)
//! C(d) = alpha * (A1 - A3)
//! ```
//!
//! The time term vanishes at full retention, so `C` jumps down at `y = d`.
//! The smooth branch is convex on `[0, d)` and its minimiser is the server's
//! retention target `y_max`.

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

/// Parameters of the server's cost of unlearning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Exponential base of the accuracy curve, `> 1`.
    pub a: f64,
    pub a1: f64,
    /// Accuracy exponent rate per data unit.
    pub a2: f64,
    pub a3: f64,
    /// Unlearning time per retained data unit.
    pub t0: f64,
    /// Weight of accuracy degradation.
    pub alpha: f64,
    /// Weight of compute time.
    pub beta: f64,
    /// Total data held across all users.
    pub d: f64,
}

/// Shape of the smooth cost branch on `[0, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotonicityCase {
    /// Retaining data only adds cost; the server wants nothing.
    Increasing,
    /// Retaining data always saves cost; the server wants everything.
    Decreasing,
    /// Cost falls then rises; carries the interior minimiser.
    NonMonotone { optimum: f64 },
}

impl CostParams {
    /// Cost parameters of the reference setup for a market holding `d` units.
    ///
    /// `A2 = 1/30000` (printed as `3.33e-5`), so `A2 * d = 2` for the ten-user,
    /// 6000-unit population.
    pub fn reference(d: f64) -> Self {
        CostParams {
            a: std::f64::consts::E,
            a1: 0.1,
            a2: 1.0 / 30000.0,
            a3: 0.0,
            t0: 2.85e-4,
            alpha: 1500.0,
            beta: 1.0,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("t0", self.t0),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("d", self.d),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(MarketError::field(name, "must be finite"));
            }
            if value < 0.0 {
                return Err(MarketError::field(name, "must be non-negative"));
            }
        }
        if self.a <= 1.0 {
            return Err(MarketError::field(
                "a",
                "must exceed 1 (log base of the retention target)",
            ));
        }
        if self.a2 == 0.0 {
            return Err(MarketError::field(
                "a2",
                "must be positive (retention target is undefined for A2 = 0)",
            ));
        }
        if self.accuracy_weight() == 0.0 && self.time_weight() == 0.0 {
            return Err(MarketError::InvalidParams(
                "alpha*A1 and beta*T0 are both zero: cost is flat".into(),
            ));
        }
        Ok(())
    }

    /// `alpha * A1`.
    fn accuracy_weight(&self) -> f64 {
        self.alpha * self.a1
    }

    /// `beta * T0`, the marginal time cost of retaining one unit.
    pub fn time_weight(&self) -> f64 {
        self.beta * self.t0
    }

    fn ln_a(&self) -> f64 {
        self.a.ln()
    }

    fn check_range(&self, op: &'static str, v: f64) -> Result<()> {
        if !(0.0..=self.d).contains(&v) {
            return Err(MarketError::domain(
                op,
                format!("{v} outside [0, {}]", self.d),
            ));
        }
        Ok(())
    }

    /// Accuracy degradation after redeeming `x` units.
    pub fn accuracy_degradation(&self, x: f64) -> Result<f64> {
        self.check_range("accuracy_degradation", x)?;
        Ok(self.a1 * self.a.powf(self.a2 * x) - self.a3)
    }

    /// Unlearning time after redeeming `x` units.
    pub fn unlearn_time(&self, x: f64) -> Result<f64> {
        self.check_range("unlearn_time", x)?;
        if x == 0.0 {
            Ok(0.0)
        } else {
            Ok(self.t0 * (self.d - x))
        }
    }

    /// Total cost `C(y)` when `y` units are retained, including the jump at `y = d`.
    pub fn retention_cost(&self, y: f64) -> Result<f64> {
        self.check_range("retention_cost", y)?;
        let accuracy = self.a1 * self.a.powf(self.a2 * (self.d - y)) - self.a3;
        let time = if y < self.d { self.t0 * y } else { 0.0 };
        Ok(self.alpha * accuracy + self.beta * time)
    }

    /// The smooth branch of `C` extended to `y = d`, i.e. `C(d^-)` at the end.
    pub fn continuous_cost(&self, y: f64) -> Result<f64> {
        self.check_range("continuous_cost", y)?;
        let accuracy = self.a1 * self.a.powf(self.a2 * (self.d - y)) - self.a3;
        Ok(self.alpha * accuracy + self.time_weight() * y)
    }

    /// Marginal accuracy saving of retaining one more unit at level `y`.
    fn marginal_saving(&self, y: f64) -> f64 {
        self.accuracy_weight() * self.a2 * self.ln_a() * self.a.powf(self.a2 * (self.d - y))
    }

    /// Exact derivative of the smooth cost branch.
    pub fn cost_slope(&self, y: f64) -> f64 {
        self.time_weight() - self.marginal_saving(y)
    }

    /// Unclamped zero of the cost slope, `-inf`/`+inf` when one weight vanishes.
    fn stationary_point(&self) -> f64 {
        let tw = self.time_weight();
        if tw == 0.0 {
            return f64::INFINITY;
        }
        let ratio = self.accuracy_weight() * self.a2 * self.ln_a() / tw;
        // ln(0) = -inf clamps to zero retention.
        self.d + ratio.ln() / (self.ln_a() * self.a2)
    }

    /// Retention target `y_max`: the minimiser of the smooth cost, clamped to `[0, d]`.
    pub fn optimal_retention(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.stationary_point().clamp(0.0, self.d))
    }

    /// Which of the three cost shapes these parameters produce on `[0, d)`.
    pub fn classify_monotonicity(&self) -> Result<MonotonicityCase> {
        self.validate()?;
        // The slope is non-decreasing in y, so its ends decide the shape.
        if self.cost_slope(0.0) >= 0.0 {
            Ok(MonotonicityCase::Increasing)
        } else if self.cost_slope(self.d) <= 0.0 {
            Ok(MonotonicityCase::Decreasing)
        } else {
            Ok(MonotonicityCase::NonMonotone {
                optimum: self.stationary_point(),
            })
        }
    }

    /// Server demand `eta(y, B)` with the target precomputed.
    pub(crate) fn demand_towards(&self, target: f64, y: f64, price: f64) -> f64 {
        if y >= target {
            return 0.0;
        }
        let saving = self.marginal_saving(y);
        let unit_cost = self.time_weight() + price;
        if saving <= unit_cost {
            return 0.0;
        }
        let delta = (saving / unit_cost).ln() / (self.ln_a() * self.a2);
        delta.clamp(0.0, target - y)
    }

    /// Extra data the server wants to retain at price `price` when holding `y`.
    pub fn demand(&self, y: f64, price: f64) -> Result<f64> {
        let target = self.optimal_retention()?;
        if !(price >= 0.0) {
            return Err(MarketError::domain("demand", format!("price {price} < 0")));
        }
        if !(0.0..=target).contains(&y) {
            return Err(MarketError::domain(
                "demand",
                format!("holding {y} outside [0, y_max = {target}]"),
            ));
        }
        Ok(self.demand_towards(target, y, price))
    }

    /// Highest uniform price at which buying everything up to `y_max` still pays off.
    ///
    /// `C(y_max)` is taken on the smooth branch; the jump at `d` belongs to
    /// the post-quotation phase.
    pub fn buy_all_price(&self, y: f64) -> Result<f64> {
        let target = self.optimal_retention()?;
        if !(y >= 0.0 && y < target) {
            return Err(MarketError::domain(
                "buy_all_price",
                format!("holding {y} outside [0, y_max = {target})"),
            ));
        }
        Ok((self.continuous_cost(y)? - self.continuous_cost(target)?) / (target - y))
    }

    /// Evaluate `C` on `points` uniform samples of `[0, d - step]` plus `y = d`.
    pub fn cost_curve(&self, points: usize, step: f64) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let upper = (self.d - step).max(0.0);
        let mut out = Vec::with_capacity(points + 1);
        for k in 0..points {
            let y = if points > 1 {
                upper * k as f64 / (points - 1) as f64
            } else {
                0.0
            };
            out.push((y, self.retention_cost(y)?));
        }
        out.push((self.d, self.retention_cost(self.d)?));
        Ok(out)
    }
}
