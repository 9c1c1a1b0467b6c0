//! Payoffs and social welfare of a finished run.
//!
//! The server's payoff is the unlearning cost it avoids relative to
//! unlearning everything, net of what it paid:
//! `xi_s = C(0) - C(y^T) - P`. Users collect the payments plus the privacy
//! utility of the data they redeemed: `xi_u = P + sum_i lambda_i ln(d_i - y_i^T + 1)`.
//! Payments cancel in the welfare `xi = xi_s + xi_u`.

use serde::Serialize;

use crate::cost::CostParams;
use crate::engine::TradeOutcome;
use crate::error::{MarketError, Result};
use crate::privacy::UserProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub xi_s: f64,
    pub xi_u: f64,
    pub xi: f64,
    pub total_payment: f64,
    pub y_final: f64,
    pub rounds: u64,
}

/// `C(0) - C(y^T)` minus the total payment.
pub fn server_payoff(params: &CostParams, outcome: &TradeOutcome) -> Result<f64> {
    let saved = params.retention_cost(0.0)? - params.retention_cost(outcome.total_retained())?;
    Ok(saved - outcome.total_payment())
}

/// Privacy utility of the redeemed data, summed over users.
pub fn redeemed_utility(users: &[UserProfile], outcome: &TradeOutcome) -> Result<f64> {
    if users.len() != outcome.sold.len() {
        return Err(MarketError::domain(
            "users_payoff",
            format!("{} users but {} holdings", users.len(), outcome.sold.len()),
        ));
    }
    users
        .iter()
        .zip(&outcome.sold)
        .map(|(u, &sold)| u.privacy_utility(sold))
        .sum()
}

/// Payments received plus the privacy utility of redeemed data.
pub fn users_payoff(users: &[UserProfile], outcome: &TradeOutcome) -> Result<f64> {
    Ok(outcome.total_payment() + redeemed_utility(users, outcome)?)
}

pub fn social_welfare(
    params: &CostParams,
    users: &[UserProfile],
    outcome: &TradeOutcome,
) -> Result<f64> {
    Ok(server_payoff(params, outcome)? + users_payoff(users, outcome)?)
}

/// Welfare without going through payments: `C(0) - C(y^T)` plus redeemed utility.
pub fn welfare_closed_form(
    params: &CostParams,
    users: &[UserProfile],
    outcome: &TradeOutcome,
) -> Result<f64> {
    let saved = params.retention_cost(0.0)? - params.retention_cost(outcome.total_retained())?;
    Ok(saved + redeemed_utility(users, outcome)?)
}

pub fn evaluate(
    params: &CostParams,
    users: &[UserProfile],
    outcome: &TradeOutcome,
) -> Result<RunMetrics> {
    let xi_s = server_payoff(params, outcome)?;
    let xi_u = users_payoff(users, outcome)?;
    Ok(RunMetrics {
        xi_s,
        xi_u,
        xi: xi_s + xi_u,
        total_payment: outcome.total_payment(),
        y_final: outcome.total_retained(),
        rounds: outcome.rounds.len() as u64,
    })
}
