//! Time-of-use tariff: 24 hourly buy prices plus a fixed sell-back coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Day-periodic electricity tariff. Selling price is coupled to the buying
/// price through a single coefficient rather than quoted separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    /// Buy price per kWh for each hour of day, length 24.
    pub buy: Vec<f64>,
    /// Sell price = `price_coefficient` × buy price, strictly inside (0, 1).
    pub price_coefficient: f64,
}

impl TariffSchedule {
    pub fn new(buy: Vec<f64>, price_coefficient: f64) -> Result<Self> {
        let t = TariffSchedule { buy, price_coefficient };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.buy.len() != 24 {
            return Err(Error::invalid(
                "tariff",
                format!("expected 24 hourly buy prices, got {}", self.buy.len()),
            ));
        }
        if self.buy.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::invalid("tariff", "buy prices must be positive and finite"));
        }
        if !(self.price_coefficient > 0.0 && self.price_coefficient < 1.0) {
            return Err(Error::invalid(
                "tariff",
                format!("price coefficient must lie in (0,1), got {}", self.price_coefficient),
            ));
        }
        Ok(())
    }

    /// Buy price at an absolute hour index (wraps daily).
    pub fn buy_at(&self, hour: usize) -> f64 {
        self.buy[hour % 24]
    }

    /// Sell price at an absolute hour index.
    pub fn sell_at(&self, hour: usize) -> f64 {
        self.price_coefficient * self.buy_at(hour)
    }

    /// Mean of the 24 daily buy prices.
    pub fn daily_average(&self) -> f64 {
        self.buy.iter().sum::<f64>() / 24.0
    }

    /// Highest daily buy price.
    pub fn daily_max(&self) -> f64 {
        self.buy.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// The 24 buy prices starting at `hour` (price lookahead is a full day,
    /// so the published window is the daily schedule rotated in place).
    pub fn published_from(&self, hour: usize) -> [f64; 24] {
        let mut out = [0.0; 24];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.buy_at(hour + k);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(p: f64) -> TariffSchedule {
        TariffSchedule::new(vec![p; 24], 0.9).unwrap()
    }

    #[test]
    fn sell_price_is_coupled() {
        let t = flat(1.2);
        assert!((t.sell_at(7) - 1.08).abs() < 1e-12);
    }

    #[test]
    fn rotation_wraps_daily() {
        let mut buy = vec![0.3; 24];
        buy[0] = 0.9;
        let t = TariffSchedule::new(buy, 0.9).unwrap();
        let w = t.published_from(23);
        assert_eq!(w[0], 0.3); // hour 23
        assert_eq!(w[1], 0.9); // wraps to hour 0
        assert_eq!(t.buy_at(48), 0.9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TariffSchedule::new(vec![1.0; 23], 0.9).is_err());
        assert!(TariffSchedule::new(vec![-1.0; 24], 0.9).is_err());
        assert!(TariffSchedule::new(vec![1.0; 24], 1.0).is_err());
        assert!(TariffSchedule::new(vec![1.0; 24], 0.0).is_err());
    }

    #[test]
    fn daily_stats() {
        let mut buy = vec![0.5; 24];
        buy[10] = 1.5;
        let t = TariffSchedule::new(buy, 0.9).unwrap();
        assert!((t.daily_average() - (0.5 * 23.0 + 1.5) / 24.0).abs() < 1e-12);
        assert_eq!(t.daily_max(), 1.5);
    }
}
