#![allow(dead_code)]

//! Brute-force references shared by the property and acceptance suites.
//!
//! Nothing here calls into the closed forms it is compared against; the
//! cost and utility are re-derived from their definitions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retention_market::{CostParams, UserProfile};

/// Smooth branch of the cost, written out directly.
pub fn smooth_cost(p: &CostParams, y: f64) -> f64 {
    p.alpha * (p.a1 * p.a.powf(p.a2 * (p.d - y)) - p.a3) + p.beta * p.t0 * y
}

/// Best extra retention from `y` at unit price `price`, scanning every
/// grain up to `upper`. Ties keep the smaller amount.
pub fn demand_by_scan(p: &CostParams, y: f64, price: f64, upper: f64, grain: f64) -> f64 {
    let base = smooth_cost(p, y);
    let steps = ((upper - y) / grain).floor() as u64;
    let mut best = (0.0, 0.0);
    for k in 1..=steps {
        let extra = k as f64 * grain;
        let gain = base - smooth_cost(p, y + extra) - price * extra;
        if gain > best.1 {
            best = (extra, gain);
        }
    }
    best.0
}

/// Payoff-maximising sale from `remaining` units at `price`, over whole grains.
pub fn supply_by_scan(lambda: f64, remaining: f64, price: f64, grain: f64) -> f64 {
    let steps = (remaining / grain).round() as u64;
    let keep_all = lambda * (remaining + 1.0).ln();
    let mut best = (0.0, 0.0);
    for k in 1..=steps {
        let q = k as f64 * grain;
        let gain = price * q + lambda * (remaining - q + 1.0).ln() - keep_all;
        if gain > best.1 {
            best = (q, gain);
        }
    }
    best.0
}

/// Grid minimiser of the smooth cost over `[0, d]`.
pub fn argmin_cost_by_scan(p: &CostParams, step: f64) -> f64 {
    let steps = (p.d / step).floor() as u64;
    let mut best = (0.0, smooth_cost(p, 0.0));
    for k in 1..=steps {
        let y = k as f64 * step;
        let c = smooth_cost(p, y);
        if c < best.1 {
            best = (y, c);
        }
    }
    let c = smooth_cost(p, p.d);
    if c < best.1 {
        best = (p.d, c);
    }
    best.0
}

/// Reference cost parameters with the time weight chosen to land in one of
/// the three cost shapes: 0 falling, 1 interior minimum, 2 rising.
pub fn params_in_shape(rng: &mut ChaCha8Rng, shape: u8, d: f64) -> CostParams {
    let mut p = CostParams::reference(d);
    p.alpha = rng.random_range(100.0..3000.0);
    p.a1 = rng.random_range(0.01..0.5);
    p.a2 = rng.random_range(0.5..4.0) / d;
    let saving_at_d = p.alpha * p.a1 * p.a2 * p.a.ln();
    let saving_at_0 = saving_at_d * p.a.powf(p.a2 * d);
    let weight = match shape {
        0 => saving_at_d * rng.random_range(0.05..0.95),
        1 => saving_at_d + (saving_at_0 - saving_at_d) * rng.random_range(0.1..0.9),
        _ => saving_at_0 * rng.random_range(1.05..3.0),
    };
    p.beta = weight / p.t0;
    p
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn informed(endowment: f64, lambda: f64) -> UserProfile {
    UserProfile::new(endowment, lambda, true)
}
