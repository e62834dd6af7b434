//! Glue between the scenario, the forecaster, and the environment: per-hour
//! look-ahead tables and per-day episode inputs.

use crate::env::EpisodeInputs;
use crate::error::{Error, Result};
use crate::forecast::{EdRvflConfig, EdRvflModel};

use super::scenario::Scenario;

/// Net-load look-ahead for every hour of the scenario: row `h` holds the 23
/// values the state vector carries alongside the actual net load of hour `h`.
#[derive(Debug, Clone)]
pub struct ForecastTable {
    rows: Vec<[f64; 23]>,
}

impl ForecastTable {
    /// Perfect-foresight table: row `h` is the actual net load of hours
    /// `h+1..h+24`. The scenario's padding day keeps the final rows in range.
    pub fn ground_truth(scenario: &Scenario) -> Self {
        let hours = scenario.config.total_days() * 24;
        let rows = (0..hours)
            .map(|h| {
                let mut row = [0.0; 23];
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot = scenario.net_at(h + 1 + k);
                }
                row
            })
            .collect();
        ForecastTable { rows }
    }

    /// Model-based table: each scheduled hour gets a recursive 23-step
    /// forecast conditioned on the actual history up to and including that
    /// hour. Warmup hours too early to fill the model's input window fall
    /// back to ground truth; they are never scheduled, so this only keeps
    /// the table rectangular.
    pub fn from_model(model: &EdRvflModel, scenario: &Scenario) -> Result<Self> {
        let hours = scenario.config.total_days() * 24;
        let window = model.config().window;
        let mut rows = Vec::with_capacity(hours);
        for h in 0..hours {
            if h + 1 < window {
                let mut row = [0.0; 23];
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot = scenario.net_at(h + 1 + k);
                }
                rows.push(row);
                continue;
            }
            let prediction = model.forecast(&scenario.nets[..=h], 23)?;
            let mut row = [0.0; 23];
            row.copy_from_slice(&prediction);
            rows.push(row);
        }
        Ok(ForecastTable { rows })
    }

    pub fn row(&self, abs_hour: usize) -> &[f64; 23] {
        &self.rows[abs_hour]
    }

    pub fn hours(&self) -> usize {
        self.rows.len()
    }

    /// Mean absolute error against the scenario's actual nets over a day
    /// range, at a given look-ahead step (0 = one hour ahead).
    pub fn lookahead_mae(&self, scenario: &Scenario, days: std::ops::Range<usize>, step: usize) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        for day in days {
            for h in 0..24 {
                let abs = day * 24 + h;
                total += (self.rows[abs][step] - scenario.net_at(abs + 1 + step)).abs();
                count += 1;
            }
        }
        total / count.max(1) as f64
    }
}

/// Trains the net-load forecaster on the scenario's warmup and training
/// days with the default ensemble settings.
pub fn train_forecaster(scenario: &Scenario, seed: u64) -> Result<EdRvflModel> {
    let config = EdRvflConfig { seed, ..EdRvflConfig::default() };
    EdRvflModel::train(config, scenario.forecast_training_series())
}

/// Assembles one day's environment inputs from the scenario and a look-ahead
/// table.
pub fn episode_inputs(
    scenario: &Scenario,
    table: &ForecastTable,
    day: usize,
    initial_soc_ess: f64,
) -> Result<EpisodeInputs> {
    if day >= scenario.config.total_days() {
        return Err(Error::invalid("episode day", format!("day {day} outside the scenario")));
    }
    let mut forecasts = [[0.0; 23]; 24];
    for (h, row) in forecasts.iter_mut().enumerate() {
        *row = *table.row(day * 24 + h);
    }
    Ok(EpisodeInputs {
        day,
        actual_net: scenario.day_net(day),
        forecasts,
        ev_arrival_soc: scenario.arrival_socs[day],
        initial_soc_ess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::ScenarioConfig;

    fn scenario() -> Scenario {
        Scenario::generate(ScenarioConfig {
            train_days: 4,
            eval_days: 2,
            ..ScenarioConfig::summer_default(13)
        })
        .unwrap()
    }

    #[test]
    fn ground_truth_rows_shift_the_actuals() {
        let s = scenario();
        let t = ForecastTable::ground_truth(&s);
        assert_eq!(t.hours(), s.config.total_days() * 24);
        let h = 50;
        for k in 0..23 {
            assert_eq!(t.row(h)[k], s.net_at(h + 1 + k));
        }
        // The very last scheduled hour reaches into the padding day.
        let last = t.hours() - 1;
        assert_eq!(t.row(last)[22], s.net_at(last + 23));
        assert_eq!(t.lookahead_mae(&s, s.eval_day_range(), 0), 0.0);
    }

    #[test]
    fn model_table_is_deterministic_and_beats_nothing_up() {
        let s = scenario();
        let model = train_forecaster(&s, 21).unwrap();
        let a = ForecastTable::from_model(&model, &s).unwrap();
        let b = ForecastTable::from_model(&model, &s).unwrap();
        let h = s.eval_day_range().start * 24 + 5;
        assert_eq!(a.row(h), b.row(h));
        for v in a.row(h) {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn episode_inputs_pull_the_right_day() {
        let s = scenario();
        let t = ForecastTable::ground_truth(&s);
        let day = s.eval_day_range().start;
        let inputs = episode_inputs(&s, &t, day, 0.5).unwrap();
        assert_eq!(inputs.day, day);
        assert_eq!(inputs.actual_net[3], s.net_at(day * 24 + 3));
        assert_eq!(inputs.forecasts[3][0], s.net_at(day * 24 + 4));
        assert_eq!(inputs.ev_arrival_soc, s.arrival_socs[day]);
        assert!(episode_inputs(&s, &t, s.config.total_days(), 0.5).is_err());
    }
}
