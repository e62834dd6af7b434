//! TOML run configuration. Every table and key is optional — an empty file
//! is the default experiment — but unknown keys are rejected by name, so
//! typos fail loudly instead of silently running the defaults.
//!
//! Reading distinguishes *unreadable* (missing file, permissions: an I/O
//! error) from *invalid* (bad TOML, unknown key, out-of-range value: a
//! config error), so callers can exit with distinct codes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, Variant};
use crate::degradation::WearPricing;
use crate::domain::{BatterySpec, EvSessionWindow};
use crate::error::{Error, Result};
use crate::forecast::EdRvflConfig;
use crate::harness::{ScenarioConfig, Season, TariffTiers};

/// Scheduling-world settings: season preset, split sizes, thermal setpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub season: Season,
    pub warmup_days: usize,
    pub train_days: usize,
    pub eval_days: usize,
    pub temperature_k: f64,
    pub initial_soc_ess: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let base = ScenarioConfig::summer_default(0);
        ScenarioSection {
            season: base.season,
            warmup_days: base.warmup_days,
            train_days: base.train_days,
            eval_days: base.eval_days,
            temperature_k: base.temperature_k,
            initial_soc_ess: base.initial_soc_ess,
        }
    }
}

/// Time-of-use tiers; hour-of-day assignments are fixed by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TariffSection {
    pub valley: f64,
    pub flat: f64,
    pub peak: f64,
    /// Sell price as a fraction of the buy price.
    pub price_coefficient: f64,
}

impl Default for TariffSection {
    fn default() -> Self {
        let base = ScenarioConfig::summer_default(0);
        TariffSection {
            valley: base.tariff_tiers.valley,
            flat: base.tariff_tiers.flat,
            peak: base.tariff_tiers.peak,
            price_coefficient: base.price_coefficient,
        }
    }
}

/// Stationary storage: electrical spec plus wear economics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EssSection {
    pub capacity_kwh: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub replacement_cost_per_kwh: f64,
    /// Seed value of the adaptive cycling coefficient, currency per kWh.
    pub initial_alpha: f64,
}

impl Default for EssSection {
    fn default() -> Self {
        let base = ScenarioConfig::summer_default(0);
        EssSection {
            capacity_kwh: base.ess.capacity_kwh,
            charge_efficiency: base.ess.charge_efficiency,
            discharge_efficiency: base.ess.discharge_efficiency,
            soc_min: base.ess.soc_min,
            soc_max: base.ess.soc_max,
            max_charge_kw: base.ess.max_charge_kw,
            max_discharge_kw: base.ess.max_discharge_kw,
            replacement_cost_per_kwh: base.wear_ess.replacement_cost_per_kwh,
            initial_alpha: base.wear_ess.alpha,
        }
    }
}

impl EssSection {
    fn spec(&self) -> BatterySpec {
        BatterySpec {
            capacity_kwh: self.capacity_kwh,
            charge_efficiency: self.charge_efficiency,
            discharge_efficiency: self.discharge_efficiency,
            soc_min: self.soc_min,
            soc_max: self.soc_max,
            max_charge_kw: self.max_charge_kw,
            max_discharge_kw: self.max_discharge_kw,
        }
    }

    fn wear(&self) -> WearPricing {
        WearPricing::new(self.replacement_cost_per_kwh, self.initial_alpha)
    }
}

/// Aggregated EV fleet: electrical spec, wear economics, session window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvSection {
    pub capacity_kwh: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub replacement_cost_per_kwh: f64,
    pub initial_alpha: f64,
    pub arrival_hour: usize,
    pub departure_hour: usize,
    pub fleet_size: usize,
    pub arrival_soc_mean: f64,
    pub arrival_soc_std: f64,
}

impl Default for EvSection {
    fn default() -> Self {
        let base = ScenarioConfig::summer_default(0);
        EvSection {
            capacity_kwh: base.ev.capacity_kwh,
            charge_efficiency: base.ev.charge_efficiency,
            discharge_efficiency: base.ev.discharge_efficiency,
            soc_min: base.ev.soc_min,
            soc_max: base.ev.soc_max,
            max_charge_kw: base.ev.max_charge_kw,
            max_discharge_kw: base.ev.max_discharge_kw,
            replacement_cost_per_kwh: base.wear_ev.replacement_cost_per_kwh,
            initial_alpha: base.wear_ev.alpha,
            arrival_hour: base.ev_window.arrival_hour,
            departure_hour: base.ev_window.departure_hour,
            fleet_size: base.ev_window.fleet_size,
            arrival_soc_mean: base.ev_window.arrival_soc_mean,
            arrival_soc_std: base.ev_window.arrival_soc_std,
        }
    }
}

impl EvSection {
    fn spec(&self) -> BatterySpec {
        BatterySpec {
            capacity_kwh: self.capacity_kwh,
            charge_efficiency: self.charge_efficiency,
            discharge_efficiency: self.discharge_efficiency,
            soc_min: self.soc_min,
            soc_max: self.soc_max,
            max_charge_kw: self.max_charge_kw,
            max_discharge_kw: self.max_discharge_kw,
        }
    }

    fn wear(&self) -> WearPricing {
        WearPricing::new(self.replacement_cost_per_kwh, self.initial_alpha)
    }

    fn window(&self) -> EvSessionWindow {
        EvSessionWindow {
            arrival_hour: self.arrival_hour,
            departure_hour: self.departure_hour,
            fleet_size: self.fleet_size,
            arrival_soc_mean: self.arrival_soc_mean,
            arrival_soc_std: self.arrival_soc_std,
        }
    }
}

/// Learner hyper-parameters. Each key is optional and falls back to the
/// built-in defaults, so a config file only states what it changes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub variant: Option<String>,
    pub episodes: Option<usize>,
    pub gamma: Option<f64>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub target_sync_period: Option<usize>,
    pub epsilon_decay: Option<f64>,
    pub epsilon_min: Option<f64>,
    pub replay_capacity: Option<usize>,
    pub alpha_per: Option<f64>,
    pub priority_floor: Option<f64>,
    pub hidden_width: Option<usize>,
    pub hidden_layers: Option<usize>,
}

/// Forecaster settings, again all optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastSection {
    pub layers: Option<usize>,
    pub width: Option<usize>,
    pub ridge_lambda: Option<f64>,
    pub input_scale: Option<f64>,
    pub window: Option<usize>,
}

/// The whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub scenario: ScenarioSection,
    pub tariff: TariffSection,
    pub ess: EssSection,
    pub ev: EvSection,
    pub agent: AgentSection,
    pub forecast: ForecastSection,
}

impl AppConfig {
    /// Reads and parses a TOML file. I/O failures surface as [`Error::Io`];
    /// parse and validation failures as [`Error::Config`].
    pub fn load(path: &Path) -> Result<AppConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses TOML text; unknown keys are rejected with the key named.
    pub fn parse(text: &str) -> Result<AppConfig> {
        let config: AppConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.to_scenario_config(0)?; // surface range errors at load time
        Ok(config)
    }

    /// Materializes the scenario description for a given data seed.
    pub fn to_scenario_config(&self, seed: u64) -> Result<ScenarioConfig> {
        let base = match self.scenario.season {
            Season::Summer => ScenarioConfig::summer_default(seed),
            Season::Winter => ScenarioConfig::winter_default(seed),
        };
        let config = ScenarioConfig {
            season: self.scenario.season,
            warmup_days: self.scenario.warmup_days,
            train_days: self.scenario.train_days,
            eval_days: self.scenario.eval_days,
            seed,
            tariff_tiers: TariffTiers {
                valley: self.tariff.valley,
                flat: self.tariff.flat,
                peak: self.tariff.peak,
            },
            price_coefficient: self.tariff.price_coefficient,
            generator: base.generator,
            ess: self.ess.spec(),
            ev: self.ev.spec(),
            ev_window: self.ev.window(),
            wear_ess: self.ess.wear(),
            wear_ev: self.ev.wear(),
            temperature_k: self.scenario.temperature_k,
            initial_soc_ess: self.scenario.initial_soc_ess,
        };
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// Materializes the learner configuration.
    pub fn to_agent_config(
        &self,
        variant_flag: Option<&str>,
        episodes_flag: Option<usize>,
        seed: u64,
    ) -> Result<AgentConfig> {
        let a = &self.agent;
        let variant_name = variant_flag.or(a.variant.as_deref()).unwrap_or("d3qnper");
        let variant = Variant::parse(variant_name)?;
        let episodes = episodes_flag.or(a.episodes).unwrap_or(2000);
        let mut config = AgentConfig::new(variant, episodes, seed);
        if let Some(v) = a.gamma {
            config.gamma = v;
        }
        if let Some(v) = a.learning_rate {
            config.learning_rate = v;
        }
        if let Some(v) = a.batch_size {
            config.batch_size = v;
        }
        if let Some(v) = a.target_sync_period {
            config.target_sync_period = v;
        }
        if let Some(v) = a.epsilon_decay {
            config.epsilon_decay = v;
        }
        if let Some(v) = a.epsilon_min {
            config.epsilon_min = v;
        }
        if let Some(v) = a.replay_capacity {
            config.replay_capacity = v;
        }
        if let Some(v) = a.alpha_per {
            config.alpha_per = v;
        }
        if let Some(v) = a.priority_floor {
            config.priority_floor = v;
        }
        if let Some(v) = a.hidden_width {
            config.hidden_width = v;
        }
        if let Some(v) = a.hidden_layers {
            config.hidden_layers = v;
        }
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// Materializes the forecaster configuration.
    pub fn to_forecast_config(&self, seed: u64) -> Result<EdRvflConfig> {
        let mut config = EdRvflConfig { seed, ..EdRvflConfig::default() };
        let f = &self.forecast;
        if let Some(v) = f.layers {
            config.layers = v;
        }
        if let Some(v) = f.width {
            config.width = v;
        }
        if let Some(v) = f.ridge_lambda {
            config.ridge_lambda = v;
        }
        if let Some(v) = f.input_scale {
            config.input_scale = v;
        }
        if let Some(v) = f.window {
            config.window = v;
        }
        config.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// Writes the fully resolved configuration — defaults filled in, flags
    /// applied by the caller beforehand — so every run directory records
    /// exactly what it ran with.
    pub fn write_effective(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_default_experiment() {
        let config = AppConfig::parse("").unwrap();
        assert_eq!(config, AppConfig::default());
        let sc = config.to_scenario_config(42).unwrap();
        assert_eq!(sc, ScenarioConfig::summer_default(42));
    }

    #[test]
    fn sections_override_their_fields_only() {
        let text = r#"
            [scenario]
            season = "winter"
            train_days = 10

            [tariff]
            peak = 1.5

            [ev]
            fleet_size = 4

            [agent]
            variant = "dqn"
            hidden_width = 64

            [forecast]
            layers = 3
        "#;
        let config = AppConfig::parse(text).unwrap();
        let sc = config.to_scenario_config(1).unwrap();
        assert_eq!(sc.season, Season::Winter);
        assert_eq!(sc.train_days, 10);
        assert_eq!(sc.eval_days, 12, "untouched keys keep defaults");
        assert_eq!(sc.tariff_tiers.peak, 1.5);
        // Season presets still drive the generator.
        assert!(sc.generator.pv_peak_kw < 100.0);
        assert_eq!(sc.ev_window.fleet_size, 4);

        let ac = config.to_agent_config(None, None, 9).unwrap();
        assert_eq!(ac.variant, Variant::Dqn);
        assert_eq!(ac.hidden_width, 64);
        assert_eq!(ac.hidden_layers, 3, "unmentioned learner keys keep defaults");
        assert_eq!(ac.episode_budget, 2000);

        let fc = config.to_forecast_config(5).unwrap();
        assert_eq!(fc.layers, 3);
        assert_eq!(fc.width, EdRvflConfig::default().width);
        assert_eq!(fc.seed, 5);
    }

    #[test]
    fn flags_outrank_file_values() {
        let config = AppConfig::parse("[agent]\nvariant = \"dqn\"\nepisodes = 50\n").unwrap();
        let ac = config.to_agent_config(Some("d3qn"), Some(7), 0).unwrap();
        assert_eq!(ac.variant, Variant::D3qn);
        assert_eq!(ac.episode_budget, 7);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = AppConfig::parse("[tariff]\npeek = 1.2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("peek"), "error must name the offending key: {msg}");
        let err = AppConfig::parse("[typo_section]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("typo_section"));
    }

    #[test]
    fn bad_values_fail_validation_at_parse_time() {
        // Valley above peak breaks tier ordering.
        assert!(AppConfig::parse("[tariff]\nvalley = 2.0\n").is_err());
        // SoC band inverted.
        assert!(AppConfig::parse("[ess]\nsoc_min = 0.95\n").is_err());
        // Bad season string names the value.
        let err = AppConfig::parse("[scenario]\nseason = \"spring\"\n").unwrap_err();
        assert!(err.to_string().contains("spring"));
    }

    #[test]
    fn load_distinguishes_unreadable_from_invalid() {
        let missing = AppConfig::load(Path::new("/nonexistent/config.toml")).unwrap_err();
        assert!(matches!(missing, Error::Io(_)));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "not toml at all [[[").unwrap();
        let invalid = AppConfig::load(&path).unwrap_err();
        assert!(matches!(invalid, Error::Config(_)));
    }

    #[test]
    fn effective_config_roundtrips() {
        let config = AppConfig::parse("[scenario]\ntrain_days = 5\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("effective-config.toml");
        config.write_effective(&path).unwrap();
        let back = AppConfig::load(&path).unwrap();
        assert_eq!(config, back);
    }
}
