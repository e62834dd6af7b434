//! Pricing of battery wear: per-kWh degradation coefficients refreshed from
//! realized fade, step-level cycling charges, and episode cost attribution.

use serde::{Deserialize, Serialize};

/// Default replacement cost per kWh of nameplate capacity (tariff currency).
pub const DEFAULT_ESS_REPLACEMENT_COST_PER_KWH: f64 = 910.0;
pub const DEFAULT_EV_REPLACEMENT_COST_PER_KWH: f64 = 1092.0;

/// Seed values for the degradation coefficients before the first episode has
/// produced a measured fade.
pub const DEFAULT_INITIAL_ALPHA_ESS: f64 = 0.35;
pub const DEFAULT_INITIAL_ALPHA_EV: f64 = 0.45;

/// Economic aging model of one device: replacement cost and the rolling
/// per-kWh-of-throughput cycling coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WearPricing {
    /// Replacement cost per kWh of nameplate capacity.
    pub replacement_cost_per_kwh: f64,
    /// Currency charged per kWh of cycling throughput; refreshed each
    /// episode from the realized fade of the previous one.
    pub alpha: f64,
}

impl WearPricing {
    pub fn new(replacement_cost_per_kwh: f64, initial_alpha: f64) -> Self {
        WearPricing { replacement_cost_per_kwh, alpha: initial_alpha }
    }

    /// Cycling wear charged for one step at the current coefficient:
    /// `alpha * |p| * dt`. Called with the coefficient of the previous
    /// episode while the current one is running.
    pub fn step_cycle_cost(&self, executed_kw: f64, dt_hours: f64) -> f64 {
        self.alpha * executed_kw.abs() * dt_hours
    }

    /// Refreshes the coefficient after an episode: the realized cycle fade,
    /// priced at replacement cost, spread over the episode's throughput.
    /// Zero-throughput episodes keep the previous coefficient (no cycling
    /// happened, so there is nothing to spread the cost over).
    pub fn update_alpha(&mut self, delta_q_cycle: f64, capacity_kwh: f64, throughput_kwh: f64) {
        if throughput_kwh > 0.0 {
            self.alpha = self.replacement_cost_per_kwh * delta_q_cycle * capacity_kwh / throughput_kwh;
        }
    }

    /// One-off calendar charge for an episode's rest fade.
    pub fn calendar_cost(&self, delta_q_calendar: f64, capacity_kwh: f64) -> f64 {
        delta_q_calendar * self.replacement_cost_per_kwh * capacity_kwh
    }
}

/// Degradation money attributed over one episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeCosts {
    pub ess_cycle_cost: f64,
    pub ev_cycle_cost: f64,
    pub ess_calendar_cost: f64,
    pub ev_calendar_cost: f64,
}

impl EpisodeCosts {
    /// Borne by the building: all cycling wear plus the stationary unit's
    /// calendar fade.
    pub fn building_borne(&self) -> f64 {
        self.ess_cycle_cost + self.ev_cycle_cost + self.ess_calendar_cost
    }

    /// Borne by the EV owners: their fleet's calendar fade.
    pub fn ev_user_borne(&self) -> f64 {
        self.ev_calendar_cost
    }
}
