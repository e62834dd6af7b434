//! Chemistry-specific stress factors and capacity-fade laws.
//!
//! Cycle aging follows a semi-empirical stress-superposition model: a
//! depth-of-discharge stress plus a duration stress, amplified by
//! exponential mean-SoC and temperature factors, accumulated over rainflow
//! cycles, then mapped to capacity fade through a two-exponential film-growth
//! curve. Calendar aging is a square-root-of-time law with its own SoC and
//! temperature sensitivities, evaluated on a cumulative day clock so that
//! increments slow down as the cell ages.

use serde::{Deserialize, Serialize};

use super::rainflow::CycleRecord;

/// Functional form of the depth-of-discharge stress term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DodStressForm {
    /// `k1 * dod * exp(k2 * dod)` (iron-phosphate cells).
    Exponential,
    /// `1 / (k1 * dod^k2 + k3)` (nickel-manganese-cobalt cells).
    InversePower,
}

/// Full parameter set of the aging model for one cell chemistry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemistryParams {
    pub dod_form: DodStressForm,
    pub k_dod1: f64,
    pub k_dod2: f64,
    pub k_dod3: f64,
    /// Mean-SoC stress: `exp(k_soc * (soc - soc_ref))`.
    pub k_soc: f64,
    pub soc_ref: f64,
    /// Temperature stress: `exp(k_temp * (t - t_ref) * t_ref / t)`, kelvin.
    pub k_temp: f64,
    pub t_ref_k: f64,
    /// Duration stress per second of cycle span.
    pub k_time_per_s: f64,
    /// Film-growth fade curve constants.
    pub alpha_sei: f64,
    pub beta_sei: f64,
    /// Calendar law `k_cal * exp(k_cal_soc*soc) * exp(k_cal_temp/t) * days^k_cal_exp`.
    pub k_cal: f64,
    pub k_cal_soc: f64,
    pub k_cal_temp: f64,
    pub k_cal_exp: f64,
}

impl ChemistryParams {
    /// Lithium iron phosphate (stationary storage default).
    pub fn lfp() -> Self {
        ChemistryParams {
            dod_form: DodStressForm::Exponential,
            k_dod1: 9.05e-6,
            k_dod2: 1.40,
            k_dod3: 0.0,
            k_soc: 1.04,
            soc_ref: 0.5,
            k_temp: 6.93e-2,
            t_ref_k: 298.0,
            k_time_per_s: 4.14e-10,
            alpha_sei: 5.75e-2,
            beta_sei: 1.21e2,
            k_cal: 5.98e6,
            k_cal_soc: 0.69,
            k_cal_temp: -6.46e3,
            k_cal_exp: 0.5,
        }
    }

    /// Nickel manganese cobalt (EV fleet default).
    pub fn nmc() -> Self {
        ChemistryParams {
            dod_form: DodStressForm::InversePower,
            k_dod1: 1.47e4,
            k_dod2: -1.65,
            k_dod3: 3.61e2,
            k_cal: 1.14e12,
            k_cal_soc: 4.70,
            k_cal_temp: -1.08e4,
            ..ChemistryParams::lfp()
        }
    }

    /// Depth-of-discharge stress per cycle of depth `dod` in [0, 1].
    pub fn dod_stress(&self, dod: f64) -> f64 {
        match self.dod_form {
            DodStressForm::Exponential => self.k_dod1 * dod * (self.k_dod2 * dod).exp(),
            DodStressForm::InversePower => {
                1.0 / (self.k_dod1 * dod.powf(self.k_dod2) + self.k_dod3)
            }
        }
    }

    /// Mean-SoC amplification of cycle stress.
    pub fn soc_stress(&self, mean_soc: f64) -> f64 {
        (self.k_soc * (mean_soc - self.soc_ref)).exp()
    }

    /// Temperature amplification of cycle stress, `temp_k` in kelvin.
    pub fn temp_stress(&self, temp_k: f64) -> f64 {
        (self.k_temp * (temp_k - self.t_ref_k) * self.t_ref_k / temp_k).exp()
    }

    /// Stress contributed by one rainflow cycle (half cycles carry their 0.5
    /// weight here).
    pub fn cycle_stress(&self, rec: &CycleRecord, temp_k: f64) -> f64 {
        rec.weight
            * (self.dod_stress(rec.depth) + self.k_time_per_s * rec.duration_s)
            * self.soc_stress(rec.mean_soc)
            * self.temp_stress(temp_k)
    }

    /// Capacity fade as a function of accumulated cycle stress `f_total`.
    /// Zero at zero stress, asymptotically 1, steep while the passivation
    /// film forms and near-linear afterwards.
    pub fn sei_capacity_fade(&self, f_total: f64) -> f64 {
        1.0 - self.alpha_sei * (-self.beta_sei * f_total).exp()
            - (1.0 - self.alpha_sei) * (-f_total).exp()
    }

    /// Calendar fade accumulated from age zero to `age_days`, at a constant
    /// storage SoC and temperature.
    pub fn calendar_fade(&self, mean_soc: f64, temp_k: f64, age_days: f64) -> f64 {
        self.k_cal
            * (self.k_cal_soc * mean_soc).exp()
            * (self.k_cal_temp / temp_k).exp()
            * age_days.max(0.0).powf(self.k_cal_exp)
    }

    /// Calendar fade gained between two points of the cell's day clock,
    /// clamped into [0, 1].
    pub fn calendar_fade_increment(
        &self,
        mean_soc: f64,
        temp_k: f64,
        age_start_days: f64,
        age_end_days: f64,
    ) -> f64 {
        let inc = self.calendar_fade(mean_soc, temp_k, age_end_days)
            - self.calendar_fade(mean_soc, temp_k, age_start_days);
        inc.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lfp_calendar_anchor_value() {
        // 1000 days at 25 C and 50% SoC: ~10.3% fade.
        let p = ChemistryParams::lfp();
        let fade = p.calendar_fade(0.5, 298.0, 1000.0);
        assert!((fade - 0.10279242827610766).abs() < 1e-12);
        // Increment over the same span equals the absolute value.
        let inc = p.calendar_fade_increment(0.5, 298.0, 0.0, 1000.0);
        assert!((inc - fade).abs() < 1e-15);
    }

    #[test]
    fn dod_stress_chemistry_contrast() {
        let lfp = ChemistryParams::lfp();
        let nmc = ChemistryParams::nmc();
        let s_lfp = lfp.dod_stress(0.4);
        let s_nmc = nmc.dod_stress(0.4);
        assert!((s_lfp - 6.337434451071885e-6).abs() < 1e-18);
        assert!((s_nmc - 1.4918884180619706e-5).abs() < 1e-17);
        assert!((s_nmc / s_lfp - 2.3540889133924523).abs() < 1e-10);
    }

    #[test]
    fn temperature_stress_reference_point() {
        let p = ChemistryParams::lfp();
        assert!((p.temp_stress(298.0) - 1.0).abs() < 1e-15);
        assert!((p.temp_stress(308.15) - 1.9743243153288734).abs() < 1e-10);
        // Hotter is strictly worse above the reference.
        assert!(p.temp_stress(318.0) > p.temp_stress(308.15));
    }

    #[test]
    fn soc_stress_reference_point() {
        let p = ChemistryParams::lfp();
        assert!((p.soc_stress(0.5) - 1.0).abs() < 1e-15);
        assert!(p.soc_stress(0.9) > 1.0);
        assert!(p.soc_stress(0.1) < 1.0);
    }

    #[test]
    fn fade_curve_shape() {
        let p = ChemistryParams::lfp();
        assert_eq!(p.sei_capacity_fade(0.0), 0.0);
        // Early slope is alpha_sei*beta_sei + (1 - alpha_sei).
        let f = 1e-6;
        let q = p.sei_capacity_fade(f);
        assert!((q / f - 7.9).abs() < 1e-3);
        // Monotone and bounded on a wide range.
        let mut prev = -1.0;
        for i in 0..=1000 {
            let q = p.sei_capacity_fade(i as f64 * 0.01);
            assert!(q >= prev);
            assert!((0.0..=1.0).contains(&q));
            prev = q;
        }
    }

    #[test]
    fn calendar_increments_slow_with_age() {
        let p = ChemistryParams::lfp();
        let young = p.calendar_fade_increment(0.5, 308.15, 0.0, 12.0);
        let old = p.calendar_fade_increment(0.5, 308.15, 300.0, 312.0);
        assert!(young > old * 5.0);
        assert!(old > 0.0);
    }
}
