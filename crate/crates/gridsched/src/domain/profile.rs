//! Hourly building-load and PV-generation series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired hourly load and PV series covering a whole number of days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub load_kw: Vec<f64>,
    pub pv_kw: Vec<f64>,
}

impl EnergyProfile {
    pub fn new(load_kw: Vec<f64>, pv_kw: Vec<f64>) -> Result<Self> {
        let p = EnergyProfile { load_kw, pv_kw };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.load_kw.len() != self.pv_kw.len() {
            return Err(Error::invalid(
                "profile",
                format!("load has {} hours but pv has {}", self.load_kw.len(), self.pv_kw.len()),
            ));
        }
        if self.load_kw.is_empty() || self.load_kw.len() % 24 != 0 {
            return Err(Error::invalid(
                "profile",
                format!("horizon must be a positive multiple of 24 h, got {}", self.load_kw.len()),
            ));
        }
        if self.load_kw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("profile", "load values must be finite and nonnegative"));
        }
        if self.pv_kw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("profile", "pv values must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn hours(&self) -> usize {
        self.load_kw.len()
    }

    pub fn days(&self) -> usize {
        self.load_kw.len() / 24
    }

    /// Net load (demand minus PV) at an absolute hour.
    pub fn net_at(&self, hour: usize) -> f64 {
        super::net_load(self.load_kw[hour], self.pv_kw[hour])
    }

    /// The full net-load series.
    pub fn net_series(&self) -> Vec<f64> {
        (0..self.hours()).map(|h| self.net_at(h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape() {
        assert!(EnergyProfile::new(vec![1.0; 24], vec![0.0; 24]).is_ok());
        assert!(EnergyProfile::new(vec![1.0; 25], vec![0.0; 25]).is_err());
        assert!(EnergyProfile::new(vec![1.0; 24], vec![0.0; 48]).is_err());
        assert!(EnergyProfile::new(vec![], vec![]).is_err());
        assert!(EnergyProfile::new(vec![-1.0; 24], vec![0.0; 24]).is_err());
    }

    #[test]
    fn net_is_load_minus_pv() {
        let p = EnergyProfile::new(vec![100.0; 24], vec![30.0; 24]).unwrap();
        assert_eq!(p.net_at(5), 70.0);
        assert_eq!(p.days(), 1);
    }
}
