//! Observation vector and its normalization.
//!
//! The raw observation is exactly 51 numbers in a fixed order: the 24
//! hourly buy prices published ahead (current hour first), 24 net-load
//! values (the current actual followed by 23 forecasts), the EV presence
//! flag, and the two SoC fractions. Normalization divides prices by the
//! largest of the published 24 and net loads by a running maximum of
//! observed |net| so the network sees inputs of comparable magnitude;
//! flags and SoC are already fractional.

use serde::{Deserialize, Serialize};

use crate::domain::{EvSessionWindow, TariffSchedule};
use crate::error::{Error, Result};

/// Observation dimensionality.
pub const STATE_DIM: usize = 51;

const PRICE_SLOTS: usize = 24;
const NET_SLOTS: usize = 24;
const FLAG_SLOT: usize = PRICE_SLOTS + NET_SLOTS;
const SOC_ESS_SLOT: usize = FLAG_SLOT + 1;
const SOC_EV_SLOT: usize = SOC_ESS_SLOT + 1;

/// Raw (unnormalized) observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub values: [f64; STATE_DIM],
}

impl EnvState {
    pub fn prices(&self) -> &[f64] {
        &self.values[..PRICE_SLOTS]
    }

    pub fn nets(&self) -> &[f64] {
        &self.values[PRICE_SLOTS..PRICE_SLOTS + NET_SLOTS]
    }

    pub fn ev_online(&self) -> bool {
        self.values[FLAG_SLOT] != 0.0
    }

    pub fn soc_ess(&self) -> f64 {
        self.values[SOC_ESS_SLOT]
    }

    pub fn soc_ev(&self) -> f64 {
        self.values[SOC_EV_SLOT]
    }
}

/// Assembles the raw observation for hour-of-day `hour`.
///
/// `forecast_net` must hold the 23 net-load estimates following the current
/// hour. While the EV is away its SoC slot reads zero regardless of `soc_ev`.
pub fn build_state(
    hour: usize,
    tariff: &TariffSchedule,
    actual_net_now: f64,
    forecast_net: &[f64],
    ev_window: &EvSessionWindow,
    soc_ess: f64,
    soc_ev: f64,
) -> Result<EnvState> {
    if forecast_net.len() != NET_SLOTS - 1 {
        return Err(Error::invalid(
            "forecast horizon",
            format!("state needs {} future net loads, got {}", NET_SLOTS - 1, forecast_net.len()),
        ));
    }
    let mut values = [0.0; STATE_DIM];
    values[..PRICE_SLOTS].copy_from_slice(&tariff.published_from(hour));
    values[PRICE_SLOTS] = actual_net_now;
    values[PRICE_SLOTS + 1..PRICE_SLOTS + NET_SLOTS].copy_from_slice(forecast_net);
    let online = ev_window.is_online(hour % 24);
    values[FLAG_SLOT] = if online { 1.0 } else { 0.0 };
    values[SOC_ESS_SLOT] = soc_ess;
    values[SOC_EV_SLOT] = if online { soc_ev } else { 0.0 };
    Ok(EnvState { values })
}

/// Smallest net-load scale (kW); guards against division blow-ups on
/// near-zero seed days.
pub const NET_SCALE_FLOOR_KW: f64 = 1.0;

/// Running normalizer for the net-load block.
///
/// Prices are normalized per observation (by the maximum of the 24
/// published values), so the scaler only tracks the largest |net| seen so
/// far. Seeding from a day of history keeps the very first observations on
/// the same footing as later ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateScaler {
    net_scale: f64,
}

impl StateScaler {
    pub fn new(seed_nets: &[f64]) -> Self {
        let mut s = Self { net_scale: NET_SCALE_FLOOR_KW };
        for &n in seed_nets {
            s.observe(n);
        }
        s
    }

    /// Grows the scale when a larger |net| is observed.
    pub fn observe(&mut self, actual_net: f64) {
        self.net_scale = self.net_scale.max(actual_net.abs());
    }

    pub fn net_scale(&self) -> f64 {
        self.net_scale
    }

    /// Normalized copy of the observation, ready for the value network.
    pub fn scale(&self, state: &EnvState) -> [f64; STATE_DIM] {
        let mut out = state.values;
        let price_max =
            state.prices().iter().fold(f64::MIN, |a, &b| a.max(b)).max(f64::EPSILON);
        for v in &mut out[..PRICE_SLOTS] {
            *v /= price_max;
        }
        for v in &mut out[PRICE_SLOTS..PRICE_SLOTS + NET_SLOTS] {
            *v /= self.net_scale;
        }
        out
    }
}
