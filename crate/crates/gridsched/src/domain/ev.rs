//! Daily availability window of the aggregated EV fleet.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Commuter-style availability: the whole fleet is present during
/// `[arrival_hour, departure_hour)` and absent otherwise. Arrival SoC of the
/// aggregate battery is the arithmetic mean of per-vehicle draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvSessionWindow {
    /// Hour of day the fleet plugs in, 0..24.
    pub arrival_hour: usize,
    /// Hour of day the fleet leaves, `arrival_hour < departure_hour <= 24`.
    pub departure_hour: usize,
    /// Number of vehicles aggregated into the equivalent battery.
    pub fleet_size: usize,
    /// Mean and spread of per-vehicle arrival SoC.
    pub arrival_soc_mean: f64,
    pub arrival_soc_std: f64,
}

impl EvSessionWindow {
    pub fn validate(&self) -> Result<()> {
        if self.arrival_hour >= self.departure_hour || self.departure_hour > 24 {
            return Err(Error::invalid(
                "ev window",
                format!("need arrival < departure <= 24, got [{}, {})", self.arrival_hour, self.departure_hour),
            ));
        }
        if self.fleet_size == 0 {
            return Err(Error::invalid("ev window", "fleet size must be positive"));
        }
        if !(0.0 < self.arrival_soc_mean && self.arrival_soc_mean < 1.0) || self.arrival_soc_std < 0.0 {
            return Err(Error::invalid("ev window", "arrival SoC distribution out of range"));
        }
        Ok(())
    }

    /// Whether the fleet is schedulable at this hour of day.
    pub fn is_online(&self, hour_of_day: usize) -> bool {
        (self.arrival_hour..self.departure_hour).contains(&(hour_of_day % 24))
    }

    /// Hours of presence per day.
    pub fn online_hours(&self) -> usize {
        self.departure_hour - self.arrival_hour
    }

    /// Aggregate arrival SoC: mean of per-vehicle normal draws, each clipped
    /// into `[soc_min, soc_max]` before averaging, so the aggregate always
    /// lies inside the operating band.
    pub fn draw_arrival_soc<R: Rng>(&self, soc_min: f64, soc_max: f64, rng: &mut R) -> f64 {
        let dist = Normal::new(self.arrival_soc_mean, self.arrival_soc_std.max(0.0))
            .expect("validated std is nonnegative");
        let sum: f64 = (0..self.fleet_size)
            .map(|_| dist.sample(rng).clamp(soc_min, soc_max))
            .sum();
        sum / self.fleet_size as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn window() -> EvSessionWindow {
        EvSessionWindow {
            arrival_hour: 8,
            departure_hour: 18,
            fleet_size: 10,
            arrival_soc_mean: 0.35,
            arrival_soc_std: 0.1,
        }
    }

    #[test]
    fn online_interval_is_half_open() {
        let w = window();
        assert!(!w.is_online(7));
        assert!(w.is_online(8));
        assert!(w.is_online(17));
        assert!(!w.is_online(18));
        assert_eq!(w.online_hours(), 10);
    }

    #[test]
    fn arrival_soc_within_band_and_seeded() {
        let w = window();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = w.draw_arrival_soc(0.1, 0.9, &mut r1);
        let b = w.draw_arrival_soc(0.1, 0.9, &mut r2);
        assert_eq!(a, b);
        assert!((0.1..=0.9).contains(&a));
        // With 10 vehicles the aggregate concentrates near the mean.
        let mut far = 0;
        for seed in 0..200 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let s = w.draw_arrival_soc(0.1, 0.9, &mut r);
            if (s - 0.35).abs() > 0.12 {
                far += 1;
            }
        }
        assert!(far < 4, "aggregate arrival SoC should rarely stray 4 sigma from the mean");
    }

    #[test]
    fn validation() {
        let mut w = window();
        w.departure_hour = 8;
        assert!(w.validate().is_err());
        let mut w = window();
        w.departure_hour = 25;
        assert!(w.validate().is_err());
        let mut w = window();
        w.fleet_size = 0;
        assert!(w.validate().is_err());
        assert!(window().validate().is_ok());
    }
}
