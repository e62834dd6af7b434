//! Episode loop: decode, guard, clip, allocate, price, age, observe.
//!
//! One episode is one day of 24 hourly steps. The environment keeps the
//! slow state that outlives episodes — the net-load normalizer, the rolling
//! net-load history behind the reward's demand ratio, and the wear prices —
//! while each [`EpisodeInputs`] delivers a day's net loads, forecasts, and
//! EV arrival.
//!
//! The EV joins at its arrival hour with the day's arrival SoC and leaves
//! at departure. While away, its power is forced to zero without penalty.
//! While present, a departure guard masks any level that would leave the
//! fleet unable to climb back to its arrival SoC on max-power charging in
//! the remaining hours; a defiant policy gets its EV level substituted
//! (idle when allowed, otherwise max charge) rather than vetoed.

use std::collections::VecDeque;

use crate::degradation::WearPricing;
use crate::domain::{
    allocate, check_power_balance, clip_action_to_feasible, step_cashflow, step_soc, BatterySpec,
    EvSessionWindow, StepPowers, TariffSchedule, STEPS_PER_EPISODE, STEP_HOURS,
};
use crate::error::{Error, Result};

use super::action::{ActionTable, LEVELS_PER_DEVICE, N_ACTIONS};
use super::reward::{compute_price_ratios, compute_reward, RewardBreakdown, RewardInputs};
use super::state::{build_state, StateScaler, STATE_DIM};
use super::trace::{EpisodeTrace, TraceRow};

/// Hours of net-load history behind the demand ratio.
const NET_HISTORY_HOURS: usize = 48;
/// Floor (kW) for the rolling net average fed to the ratio computation.
const NET_AVG_FLOOR_KW: f64 = 1.0;
/// Slack when comparing SoC against the arrival target.
const SOC_GUARD_TOLERANCE: f64 = 1e-9;

/// One day's exogenous data.
#[derive(Debug, Clone)]
pub struct EpisodeInputs {
    /// Day index within the scenario, for trace rows.
    pub day: usize,
    /// Actual net load per hour (kW).
    pub actual_net: [f64; STEPS_PER_EPISODE],
    /// Net-load estimates for the 23 hours after each step. Deployment runs
    /// fill these from the forecaster; idealized runs from the ground truth.
    pub forecasts: [[f64; 23]; STEPS_PER_EPISODE],
    /// Fleet-average SoC at arrival.
    pub ev_arrival_soc: f64,
    /// Stationary SoC at the start of the day.
    pub initial_soc_ess: f64,
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// Normalized observation for the next decision. On the terminal step
    /// this repeats the current observation; targets must not bootstrap
    /// through it.
    pub next_state: [f64; STATE_DIM],
    pub reward: RewardBreakdown,
    pub done: bool,
}

/// The scheduling environment.
#[derive(Debug, Clone)]
pub struct Environment {
    tariff: TariffSchedule,
    ess_spec: BatterySpec,
    ev_spec: BatterySpec,
    ev_window: EvSessionWindow,
    actions: ActionTable,
    wear_ess: WearPricing,
    wear_ev: WearPricing,
    /// When false, cycling wear is still priced into the trace but removed
    /// from the reward — the degradation-blind ablation.
    price_wear_in_reward: bool,
    scaler: StateScaler,
    net_history: VecDeque<f64>,

    inputs: Option<EpisodeInputs>,
    step_idx: usize,
    soc_ess: f64,
    soc_ev: f64,
    ev_present: bool,
    arrival_soc: f64,
    departure_violation: bool,
    soc_profile_ess: Vec<f64>,
    soc_profile_ev: Vec<f64>,
    trace: EpisodeTrace,
    last_state: [f64; STATE_DIM],
}

impl Environment {
    pub fn new(
        tariff: TariffSchedule,
        ess_spec: BatterySpec,
        ev_spec: BatterySpec,
        ev_window: EvSessionWindow,
        wear_ess: WearPricing,
        wear_ev: WearPricing,
    ) -> Result<Self> {
        tariff.validate()?;
        ess_spec.validate()?;
        ev_spec.validate()?;
        ev_window.validate()?;
        let actions = ActionTable::from_specs(&ess_spec, &ev_spec);
        Ok(Self {
            tariff,
            ess_spec,
            ev_spec,
            ev_window,
            actions,
            wear_ess,
            wear_ev,
            price_wear_in_reward: true,
            scaler: StateScaler::new(&[]),
            net_history: VecDeque::with_capacity(NET_HISTORY_HOURS),
            inputs: None,
            step_idx: 0,
            soc_ess: 0.0,
            soc_ev: 0.0,
            ev_present: false,
            arrival_soc: 0.0,
            departure_violation: false,
            soc_profile_ess: Vec::new(),
            soc_profile_ev: Vec::new(),
            trace: EpisodeTrace::default(),
            last_state: [0.0; STATE_DIM],
        })
    }

    /// Primes the normalizer and the rolling demand history, typically with
    /// the scenario's warm-up days, so the first episode is scaled like
    /// later ones.
    pub fn seed_net_history(&mut self, nets: &[f64]) {
        for &n in nets {
            self.push_net(n);
        }
    }

    fn push_net(&mut self, net: f64) {
        self.scaler.observe(net);
        if self.net_history.len() == NET_HISTORY_HOURS {
            self.net_history.pop_front();
        }
        self.net_history.push_back(net);
    }

    fn rolling_avg_net(&self) -> f64 {
        if self.net_history.is_empty() {
            return NET_AVG_FLOOR_KW;
        }
        let mean = self.net_history.iter().sum::<f64>() / self.net_history.len() as f64;
        mean.max(NET_AVG_FLOOR_KW)
    }

    /// Starts a new day and returns the first observation.
    pub fn reset(&mut self, inputs: EpisodeInputs) -> Result<[f64; STATE_DIM]> {
        for v in inputs.actual_net.iter().chain(inputs.forecasts.iter().flatten()) {
            if !v.is_finite() {
                return Err(Error::invalid("episode inputs", "net loads must be finite"));
            }
        }
        if inputs.ev_arrival_soc < self.ev_spec.soc_min || inputs.ev_arrival_soc > self.ev_spec.soc_max
        {
            return Err(Error::invalid("episode inputs", "EV arrival SoC outside its band"));
        }
        if inputs.initial_soc_ess < self.ess_spec.soc_min
            || inputs.initial_soc_ess > self.ess_spec.soc_max
        {
            return Err(Error::invalid("episode inputs", "initial stationary SoC outside its band"));
        }
        self.step_idx = 0;
        self.soc_ess = inputs.initial_soc_ess;
        self.soc_ev = 0.0;
        self.ev_present = false;
        self.arrival_soc = inputs.ev_arrival_soc;
        self.departure_violation = false;
        self.soc_profile_ess = vec![self.soc_ess];
        self.soc_profile_ev = Vec::new();
        self.trace = EpisodeTrace::default();
        self.inputs = Some(inputs);
        self.sync_ev(0);
        let state = self.observe_current()?;
        self.last_state = state;
        Ok(state)
    }

    /// EV arrival/departure bookkeeping at an hour boundary.
    fn sync_ev(&mut self, hour: usize) {
        let online = hour < STEPS_PER_EPISODE && self.ev_window.is_online(hour);
        if online && !self.ev_present {
            self.ev_present = true;
            self.soc_ev = self.arrival_soc;
            self.soc_profile_ev.push(self.soc_ev);
        } else if !online && self.ev_present {
            if self.soc_ev < self.arrival_soc - SOC_GUARD_TOLERANCE {
                self.departure_violation = true;
                if let Some(row) = self.trace.rows.last_mut() {
                    row.ev_departure_violation = true;
                }
            }
            self.ev_present = false;
            self.soc_ev = 0.0;
        }
    }

    /// Builds and normalizes the observation for the current step, feeding
    /// the current actual net load into the rolling statistics first.
    fn observe_current(&mut self) -> Result<[f64; STATE_DIM]> {
        let t = self.step_idx;
        let (net_now, forecast) = {
            let inputs = self.inputs.as_ref().expect("observe before reset");
            (inputs.actual_net[t], inputs.forecasts[t])
        };
        self.push_net(net_now);
        let raw = build_state(
            t,
            &self.tariff,
            net_now,
            &forecast,
            &self.ev_window,
            self.soc_ess,
            self.soc_ev,
        )?;
        Ok(self.scaler.scale(&raw))
    }

    /// True when the EV may run at `level_kw` this hour and still reach its
    /// arrival SoC by max-power charging in the hours that remain.
    fn ev_level_allowed(&self, level_kw: f64) -> bool {
        let hours_left = self.ev_window.departure_hour.saturating_sub(self.step_idx);
        debug_assert!(hours_left >= 1, "guard queried while EV away");
        let (exec, _) = clip_action_to_feasible(self.soc_ev, level_kw, &self.ev_spec, STEP_HOURS);
        let soc_after = self.soc_ev
            + (self.ev_spec.soc_rate_charge((-exec).max(0.0))
                - self.ev_spec.soc_rate_discharge(exec.max(0.0)))
                * STEP_HOURS;
        let max_gain_per_hour =
            self.ev_spec.soc_rate_charge(self.ev_spec.max_charge_kw) * STEP_HOURS;
        soc_after + (hours_left - 1) as f64 * max_gain_per_hour
            >= self.arrival_soc - SOC_GUARD_TOLERANCE
    }

    /// Per-level guard verdicts; `None` when every level fails, in which
    /// case max charge is the only recourse.
    fn ev_allowed_levels(&self) -> Option<[bool; LEVELS_PER_DEVICE]> {
        let mut allowed = [false; LEVELS_PER_DEVICE];
        let mut any = false;
        for (i, &level) in self.actions.ev_levels().iter().enumerate() {
            allowed[i] = self.ev_level_allowed(level);
            any |= allowed[i];
        }
        any.then_some(allowed)
    }

    /// Mask over the 25 joint actions for the current step. All actions are
    /// available while the EV is away (its power is forced to zero anyway).
    pub fn action_mask(&self) -> [bool; N_ACTIONS] {
        let mut mask = [true; N_ACTIONS];
        if !self.ev_present {
            return mask;
        }
        match self.ev_allowed_levels() {
            Some(allowed) => {
                for (i, m) in mask.iter_mut().enumerate() {
                    *m = allowed[i % LEVELS_PER_DEVICE];
                }
            }
            None => {
                for (i, m) in mask.iter_mut().enumerate() {
                    *m = i % LEVELS_PER_DEVICE == 0;
                }
            }
        }
        mask
    }

    /// Executes one joint action.
    pub fn step(&mut self, action_index: usize) -> Result<StepOutcome> {
        if action_index >= N_ACTIONS {
            return Err(Error::invalid("action", format!("index {action_index} out of range")));
        }
        if self.inputs.is_none() {
            return Err(Error::invalid("environment", "step before reset"));
        }
        let t = self.step_idx;
        if t >= STEPS_PER_EPISODE {
            return Err(Error::invalid("environment", "episode already finished"));
        }
        let (day, net_now) = {
            let inputs = self.inputs.as_ref().expect("checked above");
            (inputs.day, inputs.actual_net[t])
        };

        let (ess_req, ev_req) = self.actions.decode(action_index);

        // EV level: forced idle while away; guarded while present.
        let ev_effective = if !self.ev_present {
            0.0
        } else {
            match self.ev_allowed_levels() {
                Some(allowed) => {
                    let level_idx = action_index % LEVELS_PER_DEVICE;
                    if allowed[level_idx] {
                        ev_req
                    } else if allowed[2] {
                        0.0
                    } else {
                        self.actions.ev_levels()[0]
                    }
                }
                None => self.actions.ev_levels()[0],
            }
        };

        let (ess_exec, ess_beyond) =
            clip_action_to_feasible(self.soc_ess, ess_req, &self.ess_spec, STEP_HOURS);
        let (ev_exec, ev_beyond) = if self.ev_present {
            clip_action_to_feasible(self.soc_ev, ev_effective, &self.ev_spec, STEP_HOURS)
        } else {
            (0.0, 0.0)
        };

        let powers = StepPowers {
            net_kw: net_now,
            ess_discharge_kw: ess_exec.max(0.0),
            ev_discharge_kw: ev_exec.max(0.0),
            ess_charge_kw: (-ess_exec).max(0.0),
            ev_charge_kw: (-ev_exec).max(0.0),
        };
        let alloc = allocate(
            net_now,
            powers.ess_discharge_kw,
            powers.ev_discharge_kw,
            powers.ess_charge_kw,
            powers.ev_charge_kw,
        );
        check_power_balance(t, &powers, &alloc)?;

        let buy = self.tariff.buy_at(t);
        let sell = self.tariff.sell_at(t);
        let cash = step_cashflow(&alloc, buy, sell, STEP_HOURS);

        let ess_cycle_cost = self.wear_ess.step_cycle_cost(ess_exec, STEP_HOURS);
        let ev_cycle_cost = self.wear_ev.step_cycle_cost(ev_exec, STEP_HOURS);

        let (phi_pri, phi_net) = compute_price_ratios(
            buy,
            self.tariff.daily_average(),
            net_now,
            self.rolling_avg_net(),
        )?;
        let (ess_cost_in_reward, ev_cost_in_reward) = if self.price_wear_in_reward {
            (ess_cycle_cost, ev_cycle_cost)
        } else {
            (0.0, 0.0)
        };
        let reward = compute_reward(
            &RewardInputs {
                discharge_kw: powers.ess_discharge_kw + powers.ev_discharge_kw,
                charge_kw: powers.ess_charge_kw + powers.ev_charge_kw,
                ess_cycle_cost: ess_cost_in_reward,
                ev_cycle_cost: ev_cost_in_reward,
                ess_beyond_kw: ess_beyond,
                ev_beyond_kw: if self.ev_present { ev_beyond } else { 0.0 },
            },
            phi_pri,
            phi_net,
        );

        self.soc_ess = step_soc(
            self.soc_ess,
            powers.ess_charge_kw,
            powers.ess_discharge_kw,
            &self.ess_spec,
            STEP_HOURS,
        )?;
        self.soc_profile_ess.push(self.soc_ess);
        if self.ev_present {
            self.soc_ev = step_soc(
                self.soc_ev,
                powers.ev_charge_kw,
                powers.ev_discharge_kw,
                &self.ev_spec,
                STEP_HOURS,
            )?;
            self.soc_profile_ev.push(self.soc_ev);
        }

        self.trace.push(TraceRow {
            day,
            hour: t,
            buy_price: buy,
            sell_price: sell,
            net_kw: net_now,
            action_index,
            ess_requested_kw: ess_req,
            ev_requested_kw: ev_req,
            ess_executed_kw: ess_exec,
            ev_executed_kw: ev_exec,
            ess_beyond_kw: ess_beyond,
            ev_beyond_kw: if self.ev_present { ev_beyond } else { 0.0 },
            ess_to_build_kw: alloc.ess_to_build_kw,
            ev_to_build_kw: alloc.ev_to_build_kw,
            ess_to_grid_kw: alloc.ess_to_grid_kw,
            ev_to_grid_kw: alloc.ev_to_grid_kw,
            grid_to_ess_kw: alloc.grid_to_ess_kw,
            grid_to_ev_kw: alloc.grid_to_ev_kw,
            pv_surplus_sold_kw: alloc.pv_surplus_sold_kw,
            grid_purchase_kw: alloc.grid_purchase_kw,
            bought_kw: alloc.bought_kw(),
            sold_kw: alloc.sold_kw(),
            revenue: cash.revenue,
            energy_cost: cash.energy_cost,
            ess_cycle_cost,
            ev_cycle_cost,
            phi_price: phi_pri,
            phi_net,
            reward_discharge_term: reward.discharge_term,
            reward_charge_term: reward.charge_term,
            reward_ess_deg_term: reward.ess_deg_term,
            reward_ev_deg_term: reward.ev_deg_term,
            reward_penalty_term: reward.soc_penalty_term,
            reward_total: reward.total,
            soc_ess: self.soc_ess,
            soc_ev: self.soc_ev,
            ev_online: self.ev_present,
            ev_departure_violation: false,
        });

        self.step_idx += 1;
        self.sync_ev(self.step_idx);
        let done = self.step_idx == STEPS_PER_EPISODE;
        let next_state = if done { self.last_state } else { self.observe_current()? };
        self.last_state = next_state;
        Ok(StepOutcome { next_state, reward, done })
    }

    pub fn actions(&self) -> &ActionTable {
        &self.actions
    }

    pub fn soc_ess(&self) -> f64 {
        self.soc_ess
    }

    pub fn soc_ev(&self) -> f64 {
        self.soc_ev
    }

    pub fn ev_departure_violation(&self) -> bool {
        self.departure_violation
    }

    /// Hourly SoC trajectories of the finished (or running) episode:
    /// stationary over all 25 boundaries, EV over its online window.
    pub fn soc_profiles(&self) -> (&[f64], &[f64]) {
        (&self.soc_profile_ess, &self.soc_profile_ev)
    }

    pub fn trace(&self) -> &EpisodeTrace {
        &self.trace
    }

    pub fn take_trace(&mut self) -> EpisodeTrace {
        std::mem::take(&mut self.trace)
    }

    pub fn wear_ess(&self) -> &WearPricing {
        &self.wear_ess
    }

    pub fn wear_ev(&self) -> &WearPricing {
        &self.wear_ev
    }

    pub fn wear_ess_mut(&mut self) -> &mut WearPricing {
        &mut self.wear_ess
    }

    /// Toggles whether cycling wear is priced into the reward (on by
    /// default). Trace accounting is unaffected.
    pub fn set_price_wear_in_reward(&mut self, on: bool) {
        self.price_wear_in_reward = on;
    }

    pub fn wear_ev_mut(&mut self) -> &mut WearPricing {
        &mut self.wear_ev
    }

    pub fn ess_spec(&self) -> &BatterySpec {
        &self.ess_spec
    }

    pub fn ev_spec(&self) -> &BatterySpec {
        &self.ev_spec
    }

    pub fn ev_window(&self) -> &EvSessionWindow {
        &self.ev_window
    }

    pub fn tariff(&self) -> &TariffSchedule {
        &self.tariff
    }
}
