//! Synthetic scenario generation: hourly building load, PV output, a
//! three-tier time-of-use tariff, battery nameplates, and per-day EV arrival
//! states, all derived deterministically from one seed.
//!
//! The generator is a stand-in for metered building data. Load is a commuter
//! diurnal hump over a night base, modulated on weekends, with Gaussian noise
//! and occasional midnight batch-processing spikes (servers shifting
//! delay-tolerant work into the cheap hours). PV is a clear-sky bell over the
//! daylight window attenuated by a per-day cloud factor and per-hour jitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::degradation::{
    WearPricing, DEFAULT_ESS_REPLACEMENT_COST_PER_KWH, DEFAULT_EV_REPLACEMENT_COST_PER_KWH,
    DEFAULT_INITIAL_ALPHA_ESS, DEFAULT_INITIAL_ALPHA_EV,
};
use crate::domain::{BatterySpec, EnergyProfile, EvSessionWindow, TariffSchedule};
use crate::env::Environment;
use crate::error::{Error, Result};

/// Hours of the day billed at the valley tier.
const VALLEY_HOURS: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 23];
/// Hours of the day billed at the peak tier: a morning block and an
/// early-evening block; everything else is flat.
const PEAK_HOURS: [usize; 6] = [9, 10, 11, 16, 17, 18];

/// Seasonal preset selecting generator and tariff defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Summer,
    Winter,
}

impl Season {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "summer" => Ok(Season::Summer),
            "winter" => Ok(Season::Winter),
            other => Err(Error::invalid("season", format!("unknown season `{other}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Summer => "summer",
            Season::Winter => "winter",
        }
    }
}

/// The three time-of-use price tiers (currency per kWh bought).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TariffTiers {
    pub valley: f64,
    pub flat: f64,
    pub peak: f64,
}

impl TariffTiers {
    pub fn validate(&self) -> Result<()> {
        if !(self.valley > 0.0 && self.valley < self.flat && self.flat < self.peak) {
            return Err(Error::invalid("tariff tiers", "need 0 < valley < flat < peak"));
        }
        Ok(())
    }
}

/// Knobs of the synthetic load/PV process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Load floor outside working hours (kW).
    pub load_night_kw: f64,
    /// Amplitude of the working-hours hump on weekdays (kW).
    pub load_day_amp_kw: f64,
    /// Standard deviation of per-hour load noise (kW).
    pub load_noise_kw: f64,
    /// Multiplier applied to the hump on Saturdays and Sundays.
    pub weekend_factor: f64,
    /// Peak magnitude of a midnight batch spike (kW).
    pub midnight_spike_kw: f64,
    /// Probability that a given night carries a spike.
    pub midnight_spike_prob: f64,
    /// Clear-sky PV output at solar noon (kW).
    pub pv_peak_kw: f64,
    /// Daylight window; PV is exactly zero outside it.
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("load_night_kw", self.load_night_kw),
            ("load_day_amp_kw", self.load_day_amp_kw),
            ("weekend_factor", self.weekend_factor),
            ("pv_peak_kw", self.pv_peak_kw),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("generator", format!("{name} must be positive")));
            }
        }
        if self.load_noise_kw < 0.0 || self.midnight_spike_kw < 0.0 {
            return Err(Error::invalid("generator", "noise and spike magnitudes must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.midnight_spike_prob) {
            return Err(Error::invalid("generator", "spike probability must lie in [0,1]"));
        }
        if !(0.0 <= self.sunrise_hour && self.sunrise_hour < self.sunset_hour && self.sunset_hour <= 24.0)
        {
            return Err(Error::invalid("generator", "need 0 <= sunrise < sunset <= 24"));
        }
        Ok(())
    }

    pub fn summer() -> Self {
        GeneratorParams {
            load_night_kw: 45.0,
            load_day_amp_kw: 190.0,
            load_noise_kw: 12.0,
            weekend_factor: 0.8,
            midnight_spike_kw: 60.0,
            midnight_spike_prob: 0.7,
            pv_peak_kw: 130.0,
            sunrise_hour: 5.5,
            sunset_hour: 19.0,
        }
    }

    pub fn winter() -> Self {
        GeneratorParams {
            load_night_kw: 40.0,
            load_day_amp_kw: 110.0,
            load_noise_kw: 9.0,
            weekend_factor: 0.8,
            midnight_spike_kw: 45.0,
            midnight_spike_prob: 0.7,
            pv_peak_kw: 80.0,
            sunrise_hour: 7.5,
            sunset_hour: 17.0,
        }
    }
}

/// Full description of one experiment's world, sufficient to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub season: Season,
    /// History-only days at the front: they seed the demand normalizer and
    /// the 48-hour rolling average but are never scheduled.
    pub warmup_days: usize,
    pub train_days: usize,
    pub eval_days: usize,
    pub seed: u64,
    pub tariff_tiers: TariffTiers,
    /// Sell price as a fraction of the buy price.
    pub price_coefficient: f64,
    pub generator: GeneratorParams,
    pub ess: BatterySpec,
    pub ev: BatterySpec,
    pub ev_window: EvSessionWindow,
    /// Economic wear model per device: replacement cost and the seed value
    /// of the adaptive cycling coefficient.
    pub wear_ess: WearPricing,
    pub wear_ev: WearPricing,
    /// Thermal-management setpoint of both devices, kelvin.
    pub temperature_k: f64,
    /// Stationary SoC at the start of a scheduling day (training) or of the
    /// evaluation window.
    pub initial_soc_ess: f64,
}

/// 1000 kWh stationary unit: five 200 kWh iron-phosphate racks.
pub fn default_ess_spec() -> BatterySpec {
    BatterySpec {
        capacity_kwh: 1000.0,
        charge_efficiency: 0.95,
        discharge_efficiency: 0.95,
        soc_min: 0.1,
        soc_max: 0.9,
        max_charge_kw: 100.0,
        max_discharge_kw: 100.0,
    }
}

/// 1000 kWh aggregated fleet: ten 100 kWh NMC packs.
pub fn default_ev_spec() -> BatterySpec {
    BatterySpec { ..default_ess_spec() }
}

pub fn default_ev_window() -> EvSessionWindow {
    EvSessionWindow {
        arrival_hour: 8,
        departure_hour: 18,
        fleet_size: 10,
        arrival_soc_mean: 0.35,
        arrival_soc_std: 0.1,
    }
}

impl ScenarioConfig {
    /// The default experiment: 2 warmup + 48 training + 12 evaluation days.
    pub fn summer_default(seed: u64) -> Self {
        ScenarioConfig {
            season: Season::Summer,
            warmup_days: 2,
            train_days: 48,
            eval_days: 12,
            seed,
            tariff_tiers: TariffTiers { valley: 0.32, flat: 0.78, peak: 1.66 },
            price_coefficient: 0.9,
            generator: GeneratorParams::summer(),
            ess: default_ess_spec(),
            ev: default_ev_spec(),
            ev_window: default_ev_window(),
            wear_ess: WearPricing::new(
                DEFAULT_ESS_REPLACEMENT_COST_PER_KWH,
                DEFAULT_INITIAL_ALPHA_ESS,
            ),
            wear_ev: WearPricing::new(
                DEFAULT_EV_REPLACEMENT_COST_PER_KWH,
                DEFAULT_INITIAL_ALPHA_EV,
            ),
            temperature_k: 308.15,
            initial_soc_ess: 0.5,
        }
    }

    pub fn winter_default(seed: u64) -> Self {
        ScenarioConfig {
            season: Season::Winter,
            tariff_tiers: TariffTiers { valley: 0.35, flat: 0.76, peak: 1.40 },
            generator: GeneratorParams::winter(),
            ..ScenarioConfig::summer_default(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_days == 0 || self.eval_days == 0 {
            return Err(Error::invalid("scenario", "need at least one train and one eval day"));
        }
        if self.warmup_days * 24 < 48 {
            return Err(Error::invalid(
                "scenario",
                "warmup must cover at least 48 hours to seed the rolling demand window",
            ));
        }
        self.tariff_tiers.validate()?;
        if !(self.price_coefficient > 0.0 && self.price_coefficient < 1.0) {
            return Err(Error::invalid("scenario", "price coefficient must lie in (0,1)"));
        }
        self.generator.validate()?;
        self.ess.validate()?;
        self.ev.validate()?;
        self.ev_window.validate()?;
        for (name, w) in [("ess", &self.wear_ess), ("ev", &self.wear_ev)] {
            if !(w.replacement_cost_per_kwh.is_finite() && w.replacement_cost_per_kwh > 0.0) {
                return Err(Error::invalid("wear pricing", format!("{name} replacement cost must be positive")));
            }
            if !(w.alpha.is_finite() && w.alpha >= 0.0) {
                return Err(Error::invalid("wear pricing", format!("{name} initial coefficient must be nonnegative")));
            }
        }
        if !(self.temperature_k.is_finite() && self.temperature_k > 0.0) {
            return Err(Error::invalid("scenario", "temperature must be positive kelvin"));
        }
        if self.initial_soc_ess < self.ess.soc_min || self.initial_soc_ess > self.ess.soc_max {
            return Err(Error::invalid("scenario", "initial ESS SoC outside its band"));
        }
        Ok(())
    }

    /// Warmup + train + eval days (the padding day is extra).
    pub fn total_days(&self) -> usize {
        self.warmup_days + self.train_days + self.eval_days
    }

    /// Builds the 24-hour buy-price vector from the tier table.
    pub fn tariff(&self) -> Result<TariffSchedule> {
        let mut buy = vec![self.tariff_tiers.flat; 24];
        for h in VALLEY_HOURS {
            buy[h] = self.tariff_tiers.valley;
        }
        for h in PEAK_HOURS {
            buy[h] = self.tariff_tiers.peak;
        }
        TariffSchedule::new(buy, self.price_coefficient)
    }
}

/// A generated world: profiles, tariff, and the per-day EV arrival states.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub tariff: TariffSchedule,
    /// Hourly load/PV covering `total_days() + 1` days; the final day is
    /// look-ahead padding so 23-hour forecasts near the end of the horizon
    /// stay in range, and is never scheduled.
    pub profile: EnergyProfile,
    /// Cached `load - pv` per hour, same length as the profile.
    pub nets: Vec<f64>,
    /// Fleet-average arrival SoC per day (warmup days included for
    /// regularity; only scheduled days consume theirs).
    pub arrival_socs: Vec<f64>,
}

impl Scenario {
    /// Deterministically expands a config into hourly data. The same config
    /// (seed included) always yields the same series.
    pub fn generate(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let days = config.total_days() + 1;
        let hours = days * 24;
        let g = &config.generator;

        // Independent, order-stable streams per component.
        let mut load_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x10ad));
        let mut pv_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9701));
        let mut spike_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5b1e));
        let mut soc_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0xe7));

        let noise = Normal::new(0.0, g.load_noise_kw.max(1e-12)).expect("finite std");
        let jitter: Normal<f64> = Normal::new(0.0, 0.08).expect("finite std");

        let mut load = vec![0.0; hours];
        let mut pv = vec![0.0; hours];
        for d in 0..days {
            let weekday = d % 7 < 5;
            let hump = if weekday { g.load_day_amp_kw } else { g.load_day_amp_kw * g.weekend_factor };
            // Per-day cloudiness: mostly clear, occasionally heavily overcast.
            let u: f64 = pv_rng.gen();
            let cloud = 1.0 - 0.65 * u * u;
            for h in 0..24 {
                let idx = d * 24 + h;
                let hc = h as f64 + 0.5;
                // Occupancy hump between 07:00 and 20:00.
                let pos = (hc - 7.0) / 13.0;
                let shape = if (0.0..=1.0).contains(&pos) {
                    (std::f64::consts::PI * pos).sin()
                } else {
                    0.0
                };
                load[idx] = (g.load_night_kw + hump * shape + noise.sample(&mut load_rng)).max(0.5);

                let span = g.sunset_hour - g.sunrise_hour;
                let sun = (hc - g.sunrise_hour) / span;
                if sun > 0.0 && sun < 1.0 {
                    let clear = g.pv_peak_kw * (std::f64::consts::PI * sun).sin().powf(1.3);
                    let m = (1.0 + jitter.sample(&mut pv_rng)).clamp(0.55, 1.15);
                    pv[idx] = (clear * cloud * m).clamp(0.0, g.pv_peak_kw);
                }
            }
        }

        // Midnight batch spikes: late hours of day d through the small hours
        // of day d+1, ramping up then tapering.
        const SPIKE_SHAPE: [f64; 4] = [0.7, 1.0, 0.9, 0.5];
        for d in 0..days {
            if spike_rng.gen::<f64>() < g.midnight_spike_prob {
                let magnitude = g.midnight_spike_kw * (0.5 + 0.5 * spike_rng.gen::<f64>());
                for (k, w) in SPIKE_SHAPE.iter().enumerate() {
                    let idx = d * 24 + 23 + k;
                    if idx < hours {
                        load[idx] += magnitude * w;
                    }
                }
            }
        }

        let profile = EnergyProfile::new(load, pv)?;
        let nets = profile.net_series();

        let arrival_socs = (0..config.total_days())
            .map(|_| config.ev_window.draw_arrival_soc(config.ev.soc_min, config.ev.soc_max, &mut soc_rng))
            .collect();

        let tariff = config.tariff()?;
        Ok(Scenario { config, tariff, profile, nets, arrival_socs })
    }

    /// Days eligible for training episodes.
    pub fn train_day_range(&self) -> std::ops::Range<usize> {
        self.config.warmup_days..self.config.warmup_days + self.config.train_days
    }

    /// Days of the held-out evaluation window.
    pub fn eval_day_range(&self) -> std::ops::Range<usize> {
        let start = self.config.warmup_days + self.config.train_days;
        start..start + self.config.eval_days
    }

    pub fn net_at(&self, abs_hour: usize) -> f64 {
        self.nets[abs_hour]
    }

    /// Actual net load of one day as a fixed-size array.
    pub fn day_net(&self, day: usize) -> [f64; 24] {
        let mut out = [0.0; 24];
        out.copy_from_slice(&self.nets[day * 24..day * 24 + 24]);
        out
    }

    /// Net-load history available before any scheduling starts.
    pub fn warmup_nets(&self) -> &[f64] {
        &self.nets[..self.config.warmup_days * 24]
    }

    /// Everything the forecaster may learn from: warmup plus training days.
    pub fn forecast_training_series(&self) -> &[f64] {
        &self.nets[..(self.config.warmup_days + self.config.train_days) * 24]
    }

    /// Builds the scheduling environment for this world, wear pricing at its
    /// configured seed coefficients and the demand normalizer seeded from
    /// the warmup days.
    pub fn environment(&self) -> Result<Environment> {
        let mut env = Environment::new(
            self.tariff.clone(),
            self.config.ess.clone(),
            self.config.ev.clone(),
            self.config.ev_window.clone(),
            self.config.wear_ess,
            self.config.wear_ev,
        )?;
        env.seed_net_history(self.warmup_nets());
        Ok(env)
    }

    /// Average load minus average PV over the scheduled days, a quick
    /// severity indicator used in reports.
    pub fn mean_net_kw(&self) -> f64 {
        let start = self.config.warmup_days * 24;
        let end = self.config.total_days() * 24;
        self.nets[start..end].iter().sum::<f64>() / (end - start) as f64
    }
}

/// Writes the generated series as two-column CSVs (`hour_index,kw`) plus the
/// tariff and arrival-SoC tables, for inspection or external tooling.
pub fn export_scenario_csv(scenario: &Scenario, dir: &std::path::Path) -> Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let write_series = |name: &str, values: &[f64]| -> Result<()> {
        let mut f = std::fs::File::create(dir.join(name))?;
        writeln!(f, "hour,kw")?;
        for (i, v) in values.iter().enumerate() {
            writeln!(f, "{i},{v}")?;
        }
        Ok(())
    };
    write_series("load.csv", &scenario.profile.load_kw)?;
    write_series("pv.csv", &scenario.profile.pv_kw)?;
    write_series("net.csv", &scenario.nets)?;

    let mut f = std::fs::File::create(dir.join("tariff.csv"))?;
    writeln!(f, "hour,buy,sell")?;
    for h in 0..24 {
        writeln!(f, "{h},{},{}", scenario.tariff.buy_at(h), scenario.tariff.sell_at(h))?;
    }

    let mut f = std::fs::File::create(dir.join("ev_arrivals.csv"))?;
    writeln!(f, "day,arrival_soc")?;
    for (d, soc) in scenario.arrival_socs.iter().enumerate() {
        writeln!(f, "{d},{soc}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            train_days: 4,
            eval_days: 2,
            ..ScenarioConfig::summer_default(seed)
        }
    }

    #[test]
    fn same_seed_reproduces_every_series() {
        let a = Scenario::generate(small(7)).unwrap();
        let b = Scenario::generate(small(7)).unwrap();
        assert_eq!(a.profile.load_kw, b.profile.load_kw);
        assert_eq!(a.profile.pv_kw, b.profile.pv_kw);
        assert_eq!(a.arrival_socs, b.arrival_socs);
        let c = Scenario::generate(small(8)).unwrap();
        assert_ne!(a.profile.load_kw, c.profile.load_kw);
    }

    #[test]
    fn pv_is_zero_at_night_and_bounded() {
        let s = Scenario::generate(small(3)).unwrap();
        let g = &s.config.generator;
        for (i, &p) in s.profile.pv_kw.iter().enumerate() {
            let hc = (i % 24) as f64 + 0.5;
            if hc <= g.sunrise_hour || hc >= g.sunset_hour {
                assert_eq!(p, 0.0, "pv must vanish outside daylight (hour {})", i % 24);
            }
            assert!((0.0..=g.pv_peak_kw).contains(&p));
        }
        assert!(s.profile.pv_kw.iter().any(|&p| p > 0.0));
    }

    #[test]
    fn summer_outshines_winter() {
        let summer = Scenario::generate(small(5)).unwrap();
        let winter = Scenario::generate(ScenarioConfig {
            train_days: 4,
            eval_days: 2,
            ..ScenarioConfig::winter_default(5)
        })
        .unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&summer.profile.pv_kw) > mean(&winter.profile.pv_kw));
    }

    #[test]
    fn horizon_and_ranges_line_up() {
        let s = Scenario::generate(small(1)).unwrap();
        assert_eq!(s.profile.hours(), (2 + 4 + 2 + 1) * 24);
        assert_eq!(s.profile.hours() % 24, 0);
        assert_eq!(s.train_day_range(), 2..6);
        assert_eq!(s.eval_day_range(), 6..8);
        assert_eq!(s.arrival_socs.len(), 8);
        assert_eq!(s.warmup_nets().len(), 48);
        assert_eq!(s.forecast_training_series().len(), 6 * 24);
    }

    #[test]
    fn tariff_tiers_land_on_their_hours() {
        let s = Scenario::generate(small(2)).unwrap();
        let t = &s.config.tariff_tiers;
        for h in VALLEY_HOURS {
            assert_eq!(s.tariff.buy_at(h), t.valley);
        }
        for h in PEAK_HOURS {
            assert_eq!(s.tariff.buy_at(h), t.peak);
        }
        assert_eq!(s.tariff.buy_at(13), t.flat);
        // Sell price strictly below buy everywhere.
        for h in 0..24 {
            assert!(s.tariff.sell_at(h) < s.tariff.buy_at(h));
        }
    }

    #[test]
    fn arrival_socs_stay_inside_the_band() {
        let s = Scenario::generate(small(11)).unwrap();
        for &soc in &s.arrival_socs {
            assert!((s.config.ev.soc_min..=s.config.ev.soc_max).contains(&soc));
        }
    }

    #[test]
    fn midnight_spikes_lift_the_small_hours() {
        // With spikes forced on every night, the 00:00-02:00 mean must sit
        // clearly above the spike-free night base.
        let mut with = small(4);
        with.generator.midnight_spike_prob = 1.0;
        let mut without = small(4);
        without.generator.midnight_spike_prob = 0.0;
        let a = Scenario::generate(with).unwrap();
        let b = Scenario::generate(without).unwrap();
        let night_mean = |s: &Scenario| {
            let mut vals = Vec::new();
            for d in 1..s.config.total_days() {
                for h in 0..3 {
                    vals.push(s.profile.load_kw[d * 24 + h]);
                }
            }
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        assert!(night_mean(&a) > night_mean(&b) + 20.0);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = small(1);
        c.warmup_days = 1;
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.tariff_tiers.peak = c.tariff_tiers.valley;
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.generator.midnight_spike_prob = 1.5;
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.initial_soc_ess = 0.95;
        assert!(c.validate().is_err());
    }

    #[test]
    fn environment_builds_and_runs_a_day() {
        let s = Scenario::generate(small(9)).unwrap();
        let mut env = s.environment().unwrap();
        let day = s.train_day_range().start;
        let mut forecasts = [[0.0; 23]; 24];
        for (h, row) in forecasts.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = s.net_at(day * 24 + h + 1 + k);
            }
        }
        let inputs = crate::env::EpisodeInputs {
            day,
            actual_net: s.day_net(day),
            forecasts,
            ev_arrival_soc: s.arrival_socs[day],
            initial_soc_ess: s.config.initial_soc_ess,
        };
        let mut state = env.reset(inputs).unwrap();
        for _ in 0..24 {
            let out = env.step(env.actions().idle_index()).unwrap();
            state = out.next_state;
        }
        assert_eq!(state.len(), crate::env::STATE_DIM);
        assert_eq!(env.trace().len(), 24);
    }
}
