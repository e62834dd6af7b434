//! The training loop: episodes cycle over the scenario's training days; the
//! agent learns once per step; aging ledgers, wear coefficients, and the
//! objective are refreshed at every episode end.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, DqnAgent, Transition};
use crate::degradation::{apply_episode_aging, AgingLedger, ChemistryParams};
use crate::domain::{STEPS_PER_EPISODE, STEP_HOURS};
use crate::error::{Error, Result};

use super::pipeline::{episode_inputs, ForecastTable};
use super::scenario::Scenario;

/// Training-run knobs beyond the agent's own configuration.
#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Episode budget; each episode is one scheduling day.
    pub episodes: usize,
    /// Cell temperature for aging, kelvin.
    pub temperature_k: f64,
    /// Where to dump the checkpoint if learning diverges (non-finite loss).
    pub dump_dir: Option<PathBuf>,
    /// When false, the environment still accounts wear money in the trace
    /// but the reward's degradation terms are zeroed — the degradation-blind
    /// ablation.
    pub price_wear_in_reward: bool,
}

impl TrainOptions {
    pub fn new(episodes: usize, temperature_k: f64) -> Self {
        TrainOptions { episodes, temperature_k, dump_dir: None, price_wear_in_reward: true }
    }
}

/// One learning-curve sample per episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub day: usize,
    /// Cumulative shaped reward of the episode.
    pub reward: f64,
    pub epsilon: f64,
    /// Mean |TD error| over the episode's learning steps (0 before the
    /// buffer fills).
    pub mean_abs_td: f64,
    /// Building-borne money of the episode: energy net cost, cycling wear,
    /// and the stationary unit's calendar charge.
    pub operating_cost: f64,
    /// Combined battery throughput of the episode (kWh through both units).
    pub throughput_kwh: f64,
    pub soh_ess: f64,
    pub soh_ev: f64,
    pub alpha_ess: f64,
    pub alpha_ev: f64,
}

/// Everything a finished training run hands back.
pub struct TrainOutcome {
    pub agent: DqnAgent,
    pub curve: Vec<CurvePoint>,
    pub ledger_ess: AgingLedger,
    pub ledger_ev: AgingLedger,
    pub wall_clock_s: f64,
}

pub fn write_learning_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_learning_curve_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Runs the full training loop. Episode `k` (1-based) schedules training day
/// `(k-1) mod train_days`; ledgers and wear coefficients persist across
/// episodes, with the coefficient of episode `k-1` pricing the steps of
/// episode `k`.
pub fn train_agent(
    scenario: &Scenario,
    table: &ForecastTable,
    agent_config: AgentConfig,
    options: &TrainOptions,
) -> Result<TrainOutcome> {
    if options.episodes == 0 {
        return Err(Error::invalid("training", "episode budget must be positive"));
    }
    if scenario.config.train_days < 2 {
        return Err(Error::invalid("training", "need at least two training days"));
    }
    let started = Instant::now();
    let mut env = scenario.environment()?;
    env.set_price_wear_in_reward(options.price_wear_in_reward);
    let mut agent = DqnAgent::new(agent_config, crate::env::STATE_DIM, crate::env::N_ACTIONS)?;

    let params_ess = ChemistryParams::lfp();
    let params_ev = ChemistryParams::nmc();
    let mut ledger_ess = AgingLedger::fresh();
    let mut ledger_ev = AgingLedger::fresh();
    let ev_day_fraction = scenario.config.ev_window.online_hours() as f64 / 24.0;

    let mut curve = Vec::with_capacity(options.episodes);
    let train_start = scenario.train_day_range().start;

    for episode in 1..=options.episodes {
        let day = train_start + (episode - 1) % scenario.config.train_days;
        let inputs = episode_inputs(scenario, table, day, scenario.config.initial_soc_ess)?;
        let mut state = env.reset(inputs)?;

        let mut episode_reward = 0.0;
        let mut td_sum = 0.0;
        let mut td_count = 0usize;
        for _ in 0..STEPS_PER_EPISODE {
            let mask = env.action_mask();
            let action = agent.select_action(&state, &mask)?;
            let outcome = env.step(action)?;
            agent.observe(Transition {
                state: state.to_vec(),
                action,
                reward: outcome.reward.total,
                next_state: outcome.next_state.to_vec(),
                terminal: outcome.done,
            });
            match agent.learn_step() {
                Ok(Some(td)) => {
                    td_sum += td;
                    td_count += 1;
                }
                Ok(None) => {}
                Err(err) => {
                    if let Some(dir) = &options.dump_dir {
                        std::fs::create_dir_all(dir)?;
                        let dump = dir.join("diverged-checkpoint.json");
                        agent.save_checkpoint(&dump)?;
                        return Err(Error::Numerical(format!(
                            "{err}; checkpoint dumped to {}",
                            dump.display()
                        )));
                    }
                    return Err(err);
                }
            }
            episode_reward += outcome.reward.total;
            state = outcome.next_state;
            if outcome.done {
                break;
            }
        }

        // Episode-end bookkeeping: realized aging, coefficient refresh with
        // this episode's fade and throughput, calendar money, target sync.
        let (profile_ess, profile_ev) = env.soc_profiles();
        let aging_ess = apply_episode_aging(
            &mut ledger_ess,
            &params_ess,
            profile_ess,
            3600.0,
            options.temperature_k,
            1.0,
        );
        let aging_ev = apply_episode_aging(
            &mut ledger_ev,
            &params_ev,
            profile_ev,
            3600.0,
            options.temperature_k,
            ev_day_fraction,
        );
        let trace = env.take_trace();
        let throughput_ess: f64 =
            trace.rows.iter().map(|r| r.ess_executed_kw.abs() * STEP_HOURS).sum();
        let throughput_ev: f64 =
            trace.rows.iter().map(|r| r.ev_executed_kw.abs() * STEP_HOURS).sum();
        let cap_ess = scenario.config.ess.capacity_kwh;
        let cap_ev = scenario.config.ev.capacity_kwh;
        env.wear_ess_mut().update_alpha(aging_ess.delta_q_cycle, cap_ess, throughput_ess);
        env.wear_ev_mut().update_alpha(aging_ev.delta_q_cycle, cap_ev, throughput_ev);
        let ess_calendar_cost = env.wear_ess().calendar_cost(aging_ess.delta_q_calendar, cap_ess);

        let (ess_cyc, ev_cyc) = trace.total_cycle_costs();
        let operating_cost = trace.energy_net_cost() + ess_cyc + ev_cyc + ess_calendar_cost;

        agent.end_episode();
        curve.push(CurvePoint {
            episode,
            day,
            reward: episode_reward,
            epsilon: agent.epsilon(),
            mean_abs_td: if td_count > 0 { td_sum / td_count as f64 } else { 0.0 },
            operating_cost,
            throughput_kwh: throughput_ess + throughput_ev,
            soh_ess: ledger_ess.soh(),
            soh_ev: ledger_ev.soh(),
            alpha_ess: env.wear_ess().alpha,
            alpha_ev: env.wear_ev().alpha,
        });
    }

    Ok(TrainOutcome {
        agent,
        curve,
        ledger_ess,
        ledger_ev,
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}

/// Mean reward of the final `tail` fraction of episodes minus the mean of
/// the preceding same-size block — a crude plateau/slope probe used by tests.
pub fn tail_improvement(curve: &[CurvePoint], tail: f64) -> f64 {
    let n = curve.len();
    let k = ((n as f64 * tail).round() as usize).clamp(1, n / 2);
    let mean = |pts: &[CurvePoint]| pts.iter().map(|p| p.reward).sum::<f64>() / pts.len() as f64;
    mean(&curve[n - k..]) - mean(&curve[n - 2 * k..n - k])
}
