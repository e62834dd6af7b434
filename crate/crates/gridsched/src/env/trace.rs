//! Per-step execution record and its CSV round trip.
//!
//! One row per simulated hour carries everything needed to audit a run:
//! prices, net load, the action as chosen and as executed, the full power
//! allocation, cash flows, wear costs, the reward decomposition, and the
//! post-step state of charge. Summaries must be exactly reconstructible
//! from these rows — no hidden accounting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One executed step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub day: usize,
    /// Hour of day, 0–23.
    pub hour: usize,
    pub buy_price: f64,
    pub sell_price: f64,
    /// Building load minus PV, before any storage action (kW).
    pub net_kw: f64,
    /// Joint action index as chosen by the policy.
    pub action_index: usize,
    /// Decoded request, signed kW (negative = charge).
    pub ess_requested_kw: f64,
    pub ev_requested_kw: f64,
    /// After guard substitution and SoC clipping, signed kW.
    pub ess_executed_kw: f64,
    pub ev_executed_kw: f64,
    /// Requested power beyond the SoC band (kW).
    pub ess_beyond_kw: f64,
    pub ev_beyond_kw: f64,
    pub ess_to_build_kw: f64,
    pub ev_to_build_kw: f64,
    pub ess_to_grid_kw: f64,
    pub ev_to_grid_kw: f64,
    pub grid_to_ess_kw: f64,
    pub grid_to_ev_kw: f64,
    pub pv_surplus_sold_kw: f64,
    pub grid_purchase_kw: f64,
    pub bought_kw: f64,
    pub sold_kw: f64,
    pub revenue: f64,
    pub energy_cost: f64,
    pub ess_cycle_cost: f64,
    pub ev_cycle_cost: f64,
    pub phi_price: f64,
    pub phi_net: f64,
    pub reward_discharge_term: f64,
    pub reward_charge_term: f64,
    pub reward_ess_deg_term: f64,
    pub reward_ev_deg_term: f64,
    pub reward_penalty_term: f64,
    pub reward_total: f64,
    /// State of charge after the step.
    pub soc_ess: f64,
    pub soc_ev: f64,
    pub ev_online: bool,
    /// Set on the last online row when the EV left below its arrival SoC.
    pub ev_departure_violation: bool,
}

/// Ordered rows of one or more episodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    pub rows: Vec<TraceRow>,
}

impl EpisodeTrace {
    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: EpisodeTrace) {
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Total energy bill: purchases minus sales, before wear attribution.
    pub fn energy_net_cost(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_cost - r.revenue).sum()
    }

    pub fn total_revenue(&self) -> f64 {
        self.rows.iter().map(|r| r.revenue).sum()
    }

    pub fn total_energy_cost(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_cost).sum()
    }

    pub fn total_cycle_costs(&self) -> (f64, f64) {
        (
            self.rows.iter().map(|r| r.ess_cycle_cost).sum(),
            self.rows.iter().map(|r| r.ev_cycle_cost).sum(),
        )
    }

    pub fn total_reward(&self) -> f64 {
        self.rows.iter().map(|r| r.reward_total).sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(std::io::Error::from)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for record in reader.deserialize() {
            rows.push(record?);
        }
        Ok(Self { rows })
    }
}
