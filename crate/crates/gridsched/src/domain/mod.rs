//! Physical and economic primitives of the building microgrid: tariff,
//! load/PV profiles, battery dynamics, EV availability, discharge allocation,
//! and per-step cash flow. Everything here is a pure function of its inputs.

mod allocation;
mod battery;
mod cashflow;
mod ev;
mod profile;
mod tariff;

pub use allocation::{allocate, AllocationResult};
pub use battery::{clip_action_to_feasible, step_soc, BatterySpec};
pub use cashflow::{check_power_balance, step_cashflow, CashFlow, StepPowers};
pub use ev::EvSessionWindow;
pub use profile::EnergyProfile;
pub use tariff::TariffSchedule;

/// Net building load in kW: demand minus on-site PV generation. Negative
/// values mean PV surplus.
pub fn net_load(load_kw: f64, pv_kw: f64) -> f64 {
    load_kw - pv_kw
}

/// Hours per scheduling step. The whole toolkit runs on an hourly grid.
pub const STEP_HOURS: f64 = 1.0;

/// Steps per scheduling episode (one civil day).
pub const STEPS_PER_EPISODE: usize = 24;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_load_is_signed() {
        assert_eq!(net_load(120.0, 20.0), 100.0);
        assert_eq!(net_load(30.0, 75.0), -45.0);
    }
}
