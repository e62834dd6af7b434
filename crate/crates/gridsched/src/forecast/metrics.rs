//! Forecast accuracy metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    pub rmse: f64,
    pub mae: f64,
    /// Mean absolute error scaled by the mean absolute first difference of
    /// the actual series, so that a one-step naive forecast scores ~1.
    pub mase: f64,
    pub r2: f64,
}

/// Computes all four metrics over aligned series of equal length >= 2.
pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<ForecastMetrics> {
    if actual.len() != predicted.len() {
        return Err(Error::invalid(
            "metrics",
            format!("actual has {} points, predicted {}", actual.len(), predicted.len()),
        ));
    }
    let n = actual.len();
    if n < 2 {
        return Err(Error::invalid("metrics", "need at least two points"));
    }
    let nf = n as f64;

    let mut se = 0.0;
    let mut ae = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        let e = p - a;
        se += e * e;
        ae += e.abs();
    }
    let rmse = (se / nf).sqrt();
    let mae = ae / nf;

    let diff_sum: f64 = actual.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let mase_denom = diff_sum / (nf - 1.0);
    if mase_denom == 0.0 {
        return Err(Error::invalid("metrics", "actual series is constant; MASE is undefined"));
    }
    let mase = mae / mase_denom;

    let mean = actual.iter().sum::<f64>() / nf;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::invalid("metrics", "actual series has zero variance; R^2 is undefined"));
    }
    let r2 = 1.0 - se / ss_tot;

    Ok(ForecastMetrics { rmse, mae, mase, r2 })
}
