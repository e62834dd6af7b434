//! Min–max normalization fitted on the training series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map of a series onto [0, 1] based on its training min/max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn fit(series: &[f64]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("scaler", "cannot fit on an empty series"));
        }
        let min = series.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid("scaler", "series contains non-finite values"));
        }
        if max <= min {
            return Err(Error::invalid("scaler", "series is constant; min-max scale is degenerate"));
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}
