//! Day-ahead net-load forecasting.
//!
//! A stack of random-feature blocks with trained linear readouts produces
//! one prediction per block; rank-based fusion turns previous-step accuracy
//! and current-step diversity into combination weights. Inputs are lagged
//! windows of the series scaled to the unit interval.

mod edrvfl;
mod fusion;
mod metrics;
mod scaling;

pub use edrvfl::{EdRvflConfig, EdRvflModel};
pub use fusion::{fusion_weights, uniform_weights, DEFAULT_ALPHA_TRADE};
pub use metrics::{compute_metrics, ForecastMetrics};
pub use scaling::MinMaxScaler;
