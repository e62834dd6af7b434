//! Reward shaping for the scheduling agent.
//!
//! Two clamped price ratios situate the current hour within the tariff day
//! and the recent net-load history. They drive piecewise scaling
//! coefficients that make discharging attractive when electricity is dear
//! and charging attractive when it is cheap, plus a weight that discourages
//! EV cycling in cheap hours (wear is better spent on the stationary unit).
//! The shaped reward combines the weighted executed powers, the cycle wear
//! costs, and a penalty on power requested beyond the SoC limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clamp range of the price ratio.
pub const PRICE_RATIO_RANGE: (f64, f64) = (0.4, 2.2);
/// Clamp range of the net-load ratio.
pub const NET_RATIO_RANGE: (f64, f64) = (0.2, 2.4);
/// Decay rate of the EV wear weight in cheap hours.
pub const EV_WEIGHT_DECAY: f64 = 0.916;
/// Weight of the beyond-SoC penalty term.
pub const PENALTY_WEIGHT: f64 = 1.0;

/// Clamped ratios of the current buy price to the daily average and of the
/// current net load to its rolling average.
///
/// Errors when either average is nonpositive; callers own keeping the
/// rolling net average above zero (a floor of ~1 kW is typical).
pub fn compute_price_ratios(
    buy_price_now: f64,
    daily_avg_price: f64,
    net_now: f64,
    rolling_avg_net: f64,
) -> Result<(f64, f64)> {
    if daily_avg_price <= 0.0 || !daily_avg_price.is_finite() {
        return Err(Error::invalid("daily average price", "must be positive"));
    }
    if rolling_avg_net <= 0.0 || !rolling_avg_net.is_finite() {
        return Err(Error::invalid("rolling average net load", "must be positive"));
    }
    let phi_pri = (buy_price_now / daily_avg_price).clamp(PRICE_RATIO_RANGE.0, PRICE_RATIO_RANGE.1);
    let phi_net = (net_now / rolling_avg_net).clamp(NET_RATIO_RANGE.0, NET_RATIO_RANGE.1);
    Ok((phi_pri, phi_net))
}

/// Piecewise coefficients `(w_dis, w_ch)` rewarding discharge in expensive
/// hours and charge in cheap ones; both collapse to 1 exactly at the daily
/// average price.
pub fn scaling_coefficients(phi_pri: f64, phi_net: f64) -> (f64, f64) {
    let mean = 0.5 * (phi_pri + phi_net);
    let w_dis = if phi_pri > 1.0 {
        (mean - 1.0).exp()
    } else if phi_pri < 1.0 {
        phi_pri - 2.0
    } else {
        1.0
    };
    let w_ch = if phi_pri < 1.0 {
        -(1.0 - mean).exp()
    } else if phi_pri > 1.0 {
        phi_pri
    } else {
        1.0
    };
    (w_dis, w_ch)
}

/// Wear-cost weights `(w_ess, w_ev)`: the stationary unit always carries
/// unit weight, the EV weight rises above 1 in cheap hours so the agent
/// prefers spending stationary wear there.
pub fn degradation_weights(phi_pri: f64) -> (f64, f64) {
    let w_ev = if phi_pri <= 1.0 { 1.0 + 0.5 * (-EV_WEIGHT_DECAY * phi_pri).exp() } else { 1.0 };
    (1.0, w_ev)
}

/// Additive decomposition of one step's reward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// `w_dis ·` total executed discharge (kW).
    pub discharge_term: f64,
    /// `w_ch ·` total executed charge (kW).
    pub charge_term: f64,
    /// `w_ess ·` stationary cycle wear cost.
    pub ess_deg_term: f64,
    /// `w_ev ·` EV cycle wear cost.
    pub ev_deg_term: f64,
    /// Penalty on power requested beyond the SoC band (kW).
    pub soc_penalty_term: f64,
    /// `discharge − charge − ess_deg − ev_deg − penalty`.
    pub total: f64,
}

/// Executed powers and wear inputs of one step.
#[derive(Debug, Clone, Copy, Default)]
pub struct RewardInputs {
    /// Total executed discharge, both devices (kW, ≥ 0).
    pub discharge_kw: f64,
    /// Total executed charge, both devices (kW, ≥ 0).
    pub charge_kw: f64,
    /// Stationary cycle wear cost of the step (currency).
    pub ess_cycle_cost: f64,
    /// EV cycle wear cost of the step (currency).
    pub ev_cycle_cost: f64,
    /// Requested power beyond the stationary SoC band (kW, ≥ 0).
    pub ess_beyond_kw: f64,
    /// Requested power beyond the EV SoC band (kW, ≥ 0).
    pub ev_beyond_kw: f64,
}

/// Shaped reward of one step, given pre-clamped ratios.
pub fn compute_reward(inputs: &RewardInputs, phi_pri: f64, phi_net: f64) -> RewardBreakdown {
    let (w_dis, w_ch) = scaling_coefficients(phi_pri, phi_net);
    let (w_ess, w_ev) = degradation_weights(phi_pri);
    let discharge_term = w_dis * inputs.discharge_kw;
    let charge_term = w_ch * inputs.charge_kw;
    let ess_deg_term = w_ess * inputs.ess_cycle_cost;
    let ev_deg_term = w_ev * inputs.ev_cycle_cost;
    let soc_penalty_term = PENALTY_WEIGHT * (inputs.ess_beyond_kw + inputs.ev_beyond_kw);
    RewardBreakdown {
        discharge_term,
        charge_term,
        ess_deg_term,
        ev_deg_term,
        soc_penalty_term,
        total: discharge_term - charge_term - ess_deg_term - ev_deg_term - soc_penalty_term,
    }
}
