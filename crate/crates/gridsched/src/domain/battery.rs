//! Battery nameplate data, SoC dynamics, and feasibility clipping.
//!
//! Sign convention used throughout the crate: positive power discharges the
//! device, negative power charges it. The SoC update applies *both*
//! efficiencies multiplicatively on the respective power term — charging
//! stores `eta_ch·P`, discharging books only `eta_dis·P` of SoC per kW
//! delivered. The round trip is therefore intentionally not lossy in energy
//! terms; this mirrors the plant model this toolkit reproduces and is pinned
//! by tests, so do not "fix" it to a divide-by-efficiency form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nameplate description of one storage device. The EV entry describes the
/// aggregated fleet as a single equivalent battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    /// Nameplate capacity in kWh.
    pub capacity_kwh: f64,
    /// Charging efficiency in (0, 1].
    pub charge_efficiency: f64,
    /// Discharging efficiency in (0, 1].
    pub discharge_efficiency: f64,
    /// Allowed SoC band as (min, max) fractions, 0 ≤ min < max ≤ 1.
    pub soc_min: f64,
    pub soc_max: f64,
    /// Maximum charging power in kW (positive magnitude).
    pub max_charge_kw: f64,
    /// Maximum discharging power in kW (positive magnitude).
    pub max_discharge_kw: f64,
}

impl BatterySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_kwh.is_finite() && self.capacity_kwh > 0.0) {
            return Err(Error::invalid("battery", "capacity must be positive"));
        }
        for (name, eta) in [
            ("charge efficiency", self.charge_efficiency),
            ("discharge efficiency", self.discharge_efficiency),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid("battery", format!("{name} must lie in (0,1]")));
            }
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err(Error::invalid(
                "battery",
                format!("soc band ({}, {}) must satisfy 0 <= min < max <= 1", self.soc_min, self.soc_max),
            ));
        }
        if self.max_charge_kw < 0.0 || self.max_discharge_kw < 0.0 {
            return Err(Error::invalid("battery", "power limits must be nonnegative"));
        }
        Ok(())
    }

    /// SoC gained per hour of charging at `p_kw`.
    pub fn soc_rate_charge(&self, p_kw: f64) -> f64 {
        self.charge_efficiency * p_kw / self.capacity_kwh
    }

    /// SoC shed per hour of discharging at `p_kw`.
    pub fn soc_rate_discharge(&self, p_kw: f64) -> f64 {
        self.discharge_efficiency * p_kw / self.capacity_kwh
    }
}

/// One-step SoC update. `p_charge_kw` and `p_discharge_kw` are nonnegative
/// and mutually exclusive; the result is unclamped (use
/// [`clip_action_to_feasible`] beforehand to stay inside the SoC band).
pub fn step_soc(
    soc: f64,
    p_charge_kw: f64,
    p_discharge_kw: f64,
    spec: &BatterySpec,
    dt_hours: f64,
) -> Result<f64> {
    if p_charge_kw < 0.0 || p_discharge_kw < 0.0 {
        return Err(Error::invalid("power", "charge/discharge magnitudes must be nonnegative"));
    }
    if p_charge_kw > 0.0 && p_discharge_kw > 0.0 {
        return Err(Error::invalid("power", "device cannot charge and discharge in the same step"));
    }
    Ok(soc + (spec.soc_rate_charge(p_charge_kw) - spec.soc_rate_discharge(p_discharge_kw)) * dt_hours)
}

/// Largest same-direction power not leaving the SoC band, plus the clipped
/// remainder. `requested_kw` is signed (positive discharges); the caller is
/// expected to stay within the nameplate power limits. Returns
/// `(executed_kw, violation_kw)` with `violation_kw = |requested| - |executed| >= 0`.
pub fn clip_action_to_feasible(
    soc: f64,
    requested_kw: f64,
    spec: &BatterySpec,
    dt_hours: f64,
) -> (f64, f64) {
    if requested_kw == 0.0 {
        return (0.0, 0.0);
    }
    let executed = if requested_kw > 0.0 {
        // Discharge down to the SoC floor at most.
        let headroom = (soc - spec.soc_min).max(0.0);
        let p_max = headroom * spec.capacity_kwh / (spec.discharge_efficiency * dt_hours);
        requested_kw.min(p_max)
    } else {
        // Charge up to the SoC ceiling at most.
        let headroom = (spec.soc_max - soc).max(0.0);
        let p_max = headroom * spec.capacity_kwh / (spec.charge_efficiency * dt_hours);
        -((-requested_kw).min(p_max))
    };
    (executed, requested_kw.abs() - executed.abs())
}
