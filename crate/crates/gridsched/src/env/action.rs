//! Joint action space of the two storage devices.
//!
//! Each device acts on five signed power levels derived from its rated
//! powers (negative = charge, positive = discharge). The joint space is the
//! Cartesian product, flattened so index `i` decodes to
//! `(ess_levels[i / 5], ev_levels[i % 5])`.

use serde::{Deserialize, Serialize};

use crate::domain::BatterySpec;

/// Levels per device.
pub const LEVELS_PER_DEVICE: usize = 5;
/// Joint actions.
pub const N_ACTIONS: usize = LEVELS_PER_DEVICE * LEVELS_PER_DEVICE;

/// Signed power levels for both devices, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTable {
    ess_levels: [f64; LEVELS_PER_DEVICE],
    ev_levels: [f64; LEVELS_PER_DEVICE],
}

fn levels_for(spec: &BatterySpec) -> [f64; LEVELS_PER_DEVICE] {
    [
        -spec.max_charge_kw,
        -0.5 * spec.max_charge_kw,
        0.0,
        0.5 * spec.max_discharge_kw,
        spec.max_discharge_kw,
    ]
}

impl ActionTable {
    /// Builds the level sets from the rated powers of both devices.
    pub fn from_specs(ess: &BatterySpec, ev: &BatterySpec) -> Self {
        Self { ess_levels: levels_for(ess), ev_levels: levels_for(ev) }
    }

    /// Decodes a joint index into `(ess_kw, ev_kw)`, negative = charge.
    pub fn decode(&self, index: usize) -> (f64, f64) {
        assert!(index < N_ACTIONS, "action index {index} out of range");
        (self.ess_levels[index / LEVELS_PER_DEVICE], self.ev_levels[index % LEVELS_PER_DEVICE])
    }

    pub fn ess_levels(&self) -> &[f64; LEVELS_PER_DEVICE] {
        &self.ess_levels
    }

    pub fn ev_levels(&self) -> &[f64; LEVELS_PER_DEVICE] {
        &self.ev_levels
    }

    /// Index of the joint action pairing the given per-device level indices.
    pub fn index_of(&self, ess_level: usize, ev_level: usize) -> usize {
        debug_assert!(ess_level < LEVELS_PER_DEVICE && ev_level < LEVELS_PER_DEVICE);
        ess_level * LEVELS_PER_DEVICE + ev_level
    }

    /// Joint index for "both devices idle".
    pub fn idle_index(&self) -> usize {
        self.index_of(2, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ActionTable {
        let ess = BatterySpec {
            capacity_kwh: 1000.0,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            soc_min: 0.1,
            soc_max: 0.9,
            max_charge_kw: 100.0,
            max_discharge_kw: 100.0,
        };
        let ev = BatterySpec { max_charge_kw: 80.0, max_discharge_kw: 60.0, ..ess };
        ActionTable::from_specs(&ess, &ev)
    }

    #[test]
    fn decodes_row_major_over_devices() {
        let t = table();
        assert_eq!(t.decode(0), (-100.0, -80.0));
        assert_eq!(t.decode(4), (-100.0, 60.0));
        assert_eq!(t.decode(12), (0.0, 0.0));
        assert_eq!(t.decode(20), (100.0, -80.0));
        assert_eq!(t.decode(24), (100.0, 60.0));
        assert_eq!(t.idle_index(), 12);
    }

    #[test]
    fn decoding_is_bijective() {
        let t = table();
        let mut seen = std::collections::HashSet::new();
        for i in 0..N_ACTIONS {
            let (e, v) = t.decode(i);
            assert!(seen.insert((e.to_bits(), v.to_bits())), "duplicate pair at {i}");
        }
        assert_eq!(seen.len(), N_ACTIONS);
    }

    #[test]
    fn half_levels_follow_rated_power() {
        let t = table();
        assert_eq!(t.ev_levels(), &[-80.0, -40.0, 0.0, 30.0, 60.0]);
    }
}
