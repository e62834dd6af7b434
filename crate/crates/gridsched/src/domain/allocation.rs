//! Routing of combined-battery discharge between the building and the grid.
//!
//! Three mutually exclusive regimes, keyed on net load `P_net` and total
//! discharge `P_dis = ess + ev`:
//!
//! 1. `P_net > 0` and `P_dis <= P_net` — every discharged kW serves the
//!    building (boundary `P_dis == P_net` belongs here);
//! 2. `P_net > 0` and `P_dis > P_net` — the surplus `P_dis − P_net` is sold,
//!    split across devices in proportion to their discharge;
//! 3. `P_net <= 0` — the building needs nothing, all discharge is sold and
//!    the PV surplus `−P_net` is sold alongside it.
//!
//! Charging power is always drawn from the grid; building demand not met by
//! discharge is bought. The regimes agree at their boundaries, which keeps
//! the flow fields continuous in `(net, discharge)`.

use serde::{Deserialize, Serialize};

/// Where every kW went during one step. All fields are nonnegative kW.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub ess_to_build_kw: f64,
    pub ev_to_build_kw: f64,
    pub ess_to_grid_kw: f64,
    pub ev_to_grid_kw: f64,
    pub grid_to_ess_kw: f64,
    pub grid_to_ev_kw: f64,
    /// PV generation beyond building demand, sold to the grid.
    pub pv_surplus_sold_kw: f64,
    /// Building demand bought from the grid after discharge contribution.
    pub grid_purchase_kw: f64,
}

impl AllocationResult {
    /// Total power sold to the grid this step.
    pub fn sold_kw(&self) -> f64 {
        self.pv_surplus_sold_kw + self.ess_to_grid_kw + self.ev_to_grid_kw
    }

    /// Total power bought from the grid this step (building plus charging).
    pub fn bought_kw(&self) -> f64 {
        self.grid_purchase_kw + self.grid_to_ess_kw + self.grid_to_ev_kw
    }
}

/// Allocates executed device powers for one step. Discharge and charge
/// magnitudes are nonnegative; per-device mutual exclusion is the caller's
/// contract (the action decoder can only produce one direction per device).
pub fn allocate(
    net_kw: f64,
    ess_discharge_kw: f64,
    ev_discharge_kw: f64,
    ess_charge_kw: f64,
    ev_charge_kw: f64,
) -> AllocationResult {
    debug_assert!(ess_discharge_kw >= 0.0 && ev_discharge_kw >= 0.0);
    debug_assert!(ess_charge_kw >= 0.0 && ev_charge_kw >= 0.0);

    let total_discharge = ess_discharge_kw + ev_discharge_kw;
    let (ess_to_build, ev_to_build, ess_to_grid, ev_to_grid) = if net_kw > 0.0 {
        if total_discharge <= net_kw {
            (ess_discharge_kw, ev_discharge_kw, 0.0, 0.0)
        } else {
            // Proportional split of the surplus across the two devices.
            let surplus = total_discharge - net_kw;
            let ess_grid = ess_discharge_kw / total_discharge * surplus;
            let ev_grid = ev_discharge_kw / total_discharge * surplus;
            (ess_discharge_kw - ess_grid, ev_discharge_kw - ev_grid, ess_grid, ev_grid)
        }
    } else {
        (0.0, 0.0, ess_discharge_kw, ev_discharge_kw)
    };

    AllocationResult {
        ess_to_build_kw: ess_to_build,
        ev_to_build_kw: ev_to_build,
        ess_to_grid_kw: ess_to_grid,
        ev_to_grid_kw: ev_to_grid,
        grid_to_ess_kw: ess_charge_kw,
        grid_to_ev_kw: ev_charge_kw,
        pv_surplus_sold_kw: (-net_kw).max(0.0),
        grid_purchase_kw: (net_kw - ess_to_build - ev_to_build).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_all_to_building() {
        let a = allocate(80.0, 50.0, 20.0, 0.0, 0.0);
        assert_eq!(a.ess_to_build_kw, 50.0);
        assert_eq!(a.ev_to_build_kw, 20.0);
        assert_eq!(a.ess_to_grid_kw, 0.0);
        assert_eq!(a.ev_to_grid_kw, 0.0);
        assert_eq!(a.grid_purchase_kw, 10.0);
        assert_eq!(a.pv_surplus_sold_kw, 0.0);
    }

    #[test]
    fn regime_proportional_surplus() {
        // net 50, discharge 40+30: surplus 20 splits 40/70 and 30/70.
        let a = allocate(50.0, 40.0, 30.0, 0.0, 0.0);
        assert!((a.ess_to_grid_kw - 11.428571428571427).abs() < 1e-12);
        assert!((a.ev_to_grid_kw - 8.571428571428571).abs() < 1e-12);
        assert!((a.ess_to_build_kw - 28.571428571428573).abs() < 1e-12);
        assert!((a.ev_to_build_kw - 21.42857142857143).abs() < 1e-12);
        assert_eq!(a.grid_purchase_kw, 0.0);
    }

    #[test]
    fn regime_pv_surplus() {
        let a = allocate(-20.0, 50.0, 0.0, 0.0, 0.0);
        assert_eq!(a.ess_to_grid_kw, 50.0);
        assert_eq!(a.ess_to_build_kw, 0.0);
        assert_eq!(a.pv_surplus_sold_kw, 20.0);
        assert_eq!(a.grid_purchase_kw, 0.0);
    }

    #[test]
    fn charging_comes_from_grid() {
        let a = allocate(30.0, 0.0, 0.0, 100.0, 50.0);
        assert_eq!(a.grid_to_ess_kw, 100.0);
        assert_eq!(a.grid_to_ev_kw, 50.0);
        assert_eq!(a.grid_purchase_kw, 30.0);
        assert_eq!(a.bought_kw(), 180.0);
    }

    #[test]
    fn per_device_totals_are_conserved() {
        let a = allocate(50.0, 40.0, 30.0, 0.0, 0.0);
        assert!((a.ess_to_build_kw + a.ess_to_grid_kw - 40.0).abs() < 1e-12);
        assert!((a.ev_to_build_kw + a.ev_to_grid_kw - 30.0).abs() < 1e-12);
    }

    #[test]
    fn regimes_are_continuous_at_boundaries() {
        // Across discharge == net.
        let eps = 1e-9;
        let a = allocate(50.0, 25.0, 25.0, 0.0, 0.0);
        let b = allocate(50.0, 25.0 + eps, 25.0, 0.0, 0.0);
        assert!((a.ess_to_build_kw - b.ess_to_build_kw).abs() < 1e-6);
        assert!((a.ess_to_grid_kw - b.ess_to_grid_kw).abs() < 1e-6);
        // Across net == 0 with discharge present.
        let c = allocate(eps, 40.0, 0.0, 0.0, 0.0);
        let d = allocate(-eps, 40.0, 0.0, 0.0, 0.0);
        assert!((c.ess_to_grid_kw - d.ess_to_grid_kw).abs() < 1e-6);
        assert!((c.ess_to_build_kw - d.ess_to_build_kw).abs() < 1e-6);
        assert!((c.pv_surplus_sold_kw - d.pv_surplus_sold_kw).abs() < 1e-6);
    }

    #[test]
    fn zero_discharge_at_zero_net_is_all_zero() {
        let a = allocate(0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(a, AllocationResult::default());
    }
}
