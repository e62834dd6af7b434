//! The do-nothing comparator: storage charges to full at maximum power as
//! soon as it can, then sits idle; nothing ever discharges to the building
//! or the grid.

use crate::env::{Environment, STATE_DIM};
use crate::error::Result;

use super::evaluate::Policy;

/// Index of the max-charge level within one device's five levels.
const LEVEL_MAX_CHARGE: usize = 0;
/// Index of the idle level.
const LEVEL_IDLE: usize = 2;
/// Headroom below the ceiling considered "full".
const FULL_TOLERANCE: f64 = 1e-9;

/// Uncontrolled operation: each device requests maximum charge until its SoC
/// ceiling, then idles. The EV fleet plugs in on arrival and charges to full
/// like unmanaged chargers would; the stationary unit tops up from whatever
/// mix of PV surplus and grid the allocator gives it. Discharge never
/// happens, so the building buys its whole net load at the tariff.
pub struct UncontrolledPolicy;

impl Policy for UncontrolledPolicy {
    fn name(&self) -> String {
        "uncontrolled".into()
    }

    fn decide(&mut self, env: &Environment, _state: &[f64; STATE_DIM]) -> Result<usize> {
        let ess_level = if env.soc_ess() < env.ess_spec().soc_max - FULL_TOLERANCE {
            LEVEL_MAX_CHARGE
        } else {
            LEVEL_IDLE
        };
        let ev_online = env.soc_ev() > 0.0;
        let ev_level = if ev_online && env.soc_ev() < env.ev_spec().soc_max - FULL_TOLERANCE {
            LEVEL_MAX_CHARGE
        } else {
            LEVEL_IDLE
        };
        Ok(env.actions().index_of(ess_level, ev_level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::evaluate::{evaluate_policy, EvalOptions};
    use crate::harness::pipeline::ForecastTable;
    use crate::harness::scenario::{Scenario, ScenarioConfig};

    fn scenario() -> Scenario {
        Scenario::generate(ScenarioConfig {
            train_days: 2,
            eval_days: 2,
            ..ScenarioConfig::summer_default(31)
        })
        .unwrap()
    }

    #[test]
    fn never_discharges_and_tops_both_devices() {
        let s = scenario();
        let t = ForecastTable::ground_truth(&s);
        let out =
            evaluate_policy(&mut UncontrolledPolicy, &s, &t, &EvalOptions::new(308.15)).unwrap();
        assert_eq!(out.summary.ev_departure_violations, 0);
        for row in &out.trace.rows {
            assert!(row.ess_executed_kw <= 0.0, "hour {} discharged storage", row.hour);
            assert!(row.ev_executed_kw <= 0.0, "hour {} discharged the fleet", row.hour);
            assert_eq!(row.ess_to_grid_kw, 0.0);
            assert_eq!(row.ev_to_grid_kw, 0.0);
        }

        // Stationary unit: from 0.5 at max charge (0.095 SoC/h) the ceiling
        // of 0.9 is reached within ceil(0.4 / 0.095) = 5 hours, then idle.
        let spec = &s.config.ess;
        let rate = spec.soc_rate_charge(spec.max_charge_kw);
        let hours_ess = ((spec.soc_max - s.config.initial_soc_ess) / rate).ceil() as usize;
        let row = &out.trace.rows[hours_ess];
        assert!((row.soc_ess - spec.soc_max).abs() < 1e-9);
        assert_eq!(row.ess_executed_kw, 0.0, "full unit must idle");

        // EV fleet: full within ceil((soc_max − arrival)/rate) hours of each
        // day's arrival, well before departure for typical arrival SoCs.
        let ev = &s.config.ev;
        let ev_rate = ev.soc_rate_charge(ev.max_charge_kw);
        let eval_start = s.eval_day_range().start;
        for day in 0..out.summary.days {
            let arrival = s.arrival_socs[eval_start + day];
            let hours_ev = ((ev.soc_max - arrival) / ev_rate).ceil() as usize;
            let check = day * 24 + s.config.ev_window.arrival_hour + hours_ev;
            assert!(check % 24 < s.config.ev_window.departure_hour, "arrival draw too low");
            let row = &out.trace.rows[check];
            assert!(
                (row.soc_ev - ev.soc_max).abs() < 1e-9,
                "day {day} fleet not full by relative hour {hours_ev}: {}",
                row.soc_ev
            );
        }
    }

    #[test]
    fn pays_more_than_idle_storage_would() {
        let s = scenario();
        let t = ForecastTable::ground_truth(&s);
        struct Idle;
        impl Policy for Idle {
            fn name(&self) -> String {
                "idle".into()
            }
            fn decide(&mut self, env: &Environment, _s: &[f64; STATE_DIM]) -> Result<usize> {
                Ok(env.actions().idle_index())
            }
        }
        let opts = EvalOptions::new(308.15);
        let un = evaluate_policy(&mut UncontrolledPolicy, &s, &t, &opts).unwrap();
        let idle = evaluate_policy(&mut Idle, &s, &t, &opts).unwrap();
        // Charging two 1 MWh units without ever discharging strictly adds
        // purchased energy on top of the building load.
        assert!(un.summary.energy_cost > idle.summary.energy_cost + 100.0);
        assert!(un.summary.operating_cost > idle.summary.operating_cost);
    }
}
