//! Ensemble deep random-feature network for short-horizon load forecasting.
//!
//! The model stacks `layers` blocks of fixed random features: the first
//! block expands the lagged input window through a random affine map and a
//! sigmoid, each deeper block re-expands the previous block's features
//! concatenated with the raw window. Only the per-layer linear readouts are
//! trained, each by ridge regression on the block features plus direct
//! input links. Layer predictions are combined with rank-based fusion
//! weights (see [`super::fusion`]).
//!
//! Random weights depend only on `seed + layer_index`, so the first `k`
//! layers of a deeper model are identical to a `k`-layer model trained with
//! the same seed — useful when comparing depth settings.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::fusion::{fusion_weights, uniform_weights, DEFAULT_ALPHA_TRADE};
use super::scaling::MinMaxScaler;
use crate::error::{Error, Result};

/// Hyper-parameters of the ensemble network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdRvflConfig {
    /// Number of stacked random-feature blocks.
    pub layers: usize,
    /// Hidden units per block.
    pub width: usize,
    /// Ridge penalty for the readouts; `0` falls back to a least-squares
    /// solve via SVD.
    pub ridge_lambda: f64,
    /// Random weights are drawn uniformly from `[-input_scale, input_scale]`.
    pub input_scale: f64,
    /// Number of lagged values fed to the network.
    pub window: usize,
    /// Seed for the random feature maps.
    pub seed: u64,
}

impl Default for EdRvflConfig {
    fn default() -> Self {
        Self { layers: 10, width: 150, ridge_lambda: 0.5, input_scale: 0.5, window: 48, seed: 7 }
    }
}

impl EdRvflConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::invalid("forecast layers", "must be at least 1"));
        }
        if self.width == 0 {
            return Err(Error::invalid("forecast width", "must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::invalid("forecast window", "must be at least 1"));
        }
        if !self.ridge_lambda.is_finite() || self.ridge_lambda < 0.0 {
            return Err(Error::invalid("ridge penalty", "must be finite and non-negative"));
        }
        if !self.input_scale.is_finite() || self.input_scale <= 0.0 {
            return Err(Error::invalid("input scale", "must be finite and positive"));
        }
        Ok(())
    }
}

/// Trained ensemble model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdRvflModel {
    config: EdRvflConfig,
    scaler: MinMaxScaler,
    /// Per-layer random maps, `(input_dim + 1) x width`; the extra row is a
    /// bias fed by a constant one appended to the layer input.
    feature_maps: Vec<DMatrix<f64>>,
    /// Per-layer readout over `[features, window]`.
    readouts: Vec<DVector<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Random map for one layer; depends only on `seed + layer index` and the
/// layer's input width.
fn draw_feature_map(cfg: &EdRvflConfig, layer: usize, in_dim: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(layer as u64));
    let dist = Uniform::new_inclusive(-cfg.input_scale, cfg.input_scale);
    DMatrix::from_fn(in_dim + 1, cfg.width, |_, _| dist.sample(&mut rng))
}

/// `sigmoid([input, 1] * map)` over every row of `input`.
fn expand(input: &DMatrix<f64>, map: &DMatrix<f64>) -> DMatrix<f64> {
    let aug = input.clone().insert_column(input.ncols(), 1.0);
    let mut out = aug * map;
    out.apply(|v| *v = sigmoid(*v));
    out
}

/// Solve `min ||D b - y||^2 + lambda ||b||^2`.
///
/// Uses the primal normal equations when `D` is tall, the dual form when it
/// is wide, and an SVD least-squares solve when `lambda` is zero or the
/// Cholesky factorization fails.
fn ridge_solve(d: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let (n, p) = (d.nrows(), d.ncols());
    if lambda > 0.0 {
        if p <= n {
            let mut gram = d.transpose() * d;
            for i in 0..p {
                gram[(i, i)] += lambda;
            }
            if let Some(chol) = gram.cholesky() {
                return Ok(chol.solve(&(d.transpose() * y)));
            }
        } else {
            let mut gram = d * d.transpose();
            for i in 0..n {
                gram[(i, i)] += lambda;
            }
            if let Some(chol) = gram.cholesky() {
                return Ok(d.transpose() * chol.solve(y));
            }
        }
    }
    let svd = d.clone().svd(true, true);
    svd.solve(y, 1e-12).map_err(|e| Error::Numerical(format!("readout solve failed: {e}")))
}

impl EdRvflModel {
    /// Fit readouts on a raw series: rows are sliding windows, targets the
    /// value that follows each window.
    pub fn train(config: EdRvflConfig, series: &[f64]) -> Result<Self> {
        config.validate()?;
        let n_rows = series.len().saturating_sub(config.window);
        if n_rows < 2 {
            return Err(Error::invalid(
                "training series",
                format!("needs at least {} points, got {}", config.window + 2, series.len()),
            ));
        }
        let scaler = MinMaxScaler::fit(series)?;
        let scaled: Vec<f64> = series.iter().map(|v| scaler.transform(*v)).collect();

        let x = DMatrix::from_fn(n_rows, config.window, |r, c| scaled[r + c]);
        let y = DVector::from_fn(n_rows, |r, _| scaled[r + config.window]);

        let mut feature_maps = Vec::with_capacity(config.layers);
        let mut readouts = Vec::with_capacity(config.layers);
        let mut features = x.clone();
        for layer in 0..config.layers {
            let in_dim = if layer == 0 { config.window } else { config.width + config.window };
            let map = draw_feature_map(&config, layer, in_dim);
            features = if layer == 0 {
                expand(&x, &map)
            } else {
                let joined = hcat(&features, &x);
                expand(&joined, &map)
            };
            let design = hcat(&features, &x);
            readouts.push(ridge_solve(&design, &y, config.ridge_lambda)?);
            feature_maps.push(map);
        }
        Ok(Self { config, scaler, feature_maps, readouts })
    }

    pub fn config(&self) -> &EdRvflConfig {
        &self.config
    }

    /// Per-layer next-step predictions (raw units) for one raw window of
    /// `config.window` trailing values, oldest first.
    pub fn predict_layers(&self, window: &[f64]) -> Result<Vec<f64>> {
        if window.len() != self.config.window {
            return Err(Error::invalid(
                "prediction window",
                format!("expected {} values, got {}", self.config.window, window.len()),
            ));
        }
        let scaled: Vec<f64> = window.iter().map(|v| self.scaler.transform(*v)).collect();
        let x = DMatrix::from_row_slice(1, self.config.window, &scaled);
        let mut preds = Vec::with_capacity(self.config.layers);
        let mut features = x.clone();
        for (layer, map) in self.feature_maps.iter().enumerate() {
            features =
                if layer == 0 { expand(&x, map) } else { expand(&hcat(&features, &x), map) };
            let design = hcat(&features, &x);
            let scaled_pred = (design * &self.readouts[layer])[0];
            preds.push(self.scaler.inverse(scaled_pred));
        }
        Ok(preds)
    }

    /// Recursive multi-step forecast from the end of `history`.
    ///
    /// Fusion weights are fixed at the forecast origin, from each layer's
    /// error on the last observed step; predicted values are fed back as
    /// inputs for the following steps. Needs `window` points of history
    /// (`window + 1` to move past uniform weights).
    pub fn forecast(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let w = self.config.window;
        if history.len() < w {
            return Err(Error::invalid(
                "forecast history",
                format!("needs at least {} points, got {}", w, history.len()),
            ));
        }
        let mut buffer: Vec<f64> = history[history.len() - w..].to_vec();

        // Weights from the last fully observed step, kept for the whole
        // horizon.
        let first_preds = self.predict_layers(&buffer)?;
        let weights = if history.len() > w {
            let prev_window = &history[history.len() - w - 1..history.len() - 1];
            let prev_preds = self.predict_layers(prev_window)?;
            let actual = history[history.len() - 1];
            let errors: Vec<f64> = prev_preds.iter().map(|p| p - actual).collect();
            fusion_weights(&errors, &first_preds, DEFAULT_ALPHA_TRADE)
        } else {
            uniform_weights(self.config.layers)
        };

        let mut out = Vec::with_capacity(horizon);
        let mut step_preds = first_preds;
        for step in 0..horizon {
            let combined: f64 = step_preds.iter().zip(&weights).map(|(p, w)| p * w).sum();
            out.push(combined);
            if step + 1 < horizon {
                buffer.rotate_left(1);
                *buffer.last_mut().expect("window is non-empty") = combined;
                step_preds = self.predict_layers(&buffer)?;
            }
        }
        Ok(out)
    }

    /// One-step-ahead predictions over a held-out series with actual values
    /// fed back after every step. Returns predictions aligned with
    /// `series[window..]`. Fusion weights roll forward from each step's
    /// realized per-layer errors; the first step uses uniform weights.
    pub fn predict_series_one_step(&self, series: &[f64]) -> Result<Vec<f64>> {
        let w = self.config.window;
        if series.len() <= w {
            return Err(Error::invalid(
                "evaluation series",
                format!("needs more than {} points, got {}", w, series.len()),
            ));
        }
        let mut out = Vec::with_capacity(series.len() - w);
        let mut prev_errors: Option<Vec<f64>> = None;
        for t in w..series.len() {
            let preds = self.predict_layers(&series[t - w..t])?;
            let weights = match &prev_errors {
                Some(errs) => fusion_weights(errs, &preds, DEFAULT_ALPHA_TRADE),
                None => uniform_weights(self.config.layers),
            };
            out.push(preds.iter().zip(&weights).map(|(p, w)| p * w).sum());
            prev_errors = Some(preds.iter().map(|p| p - series[t]).collect());
        }
        Ok(out)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let model: Self = serde_json::from_reader(std::io::BufReader::new(file))?;
        model.config.validate()?;
        Ok(model)
    }
}

/// Column-wise concatenation `[a, b]`.
fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(a.nrows(), b.nrows());
    DMatrix::from_fn(a.nrows(), a.ncols() + b.ncols(), |r, c| {
        if c < a.ncols() {
            a[(r, c)]
        } else {
            b[(r, c - a.ncols())]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Autoregression with coefficients summing to one: after min-max
    /// scaling the relation between a window and its successor stays exactly
    /// linear, so the direct input links can reproduce it.
    fn exact_ar_series(n: usize) -> Vec<f64> {
        let coeffs = [1.5, -0.9, 0.7, -0.3];
        let mut s = vec![0.0, 1.0, -0.5, 0.3];
        while s.len() < n {
            let t = s.len();
            let next: f64 = (0..4).map(|i| coeffs[i] * s[t - 1 - i]).sum();
            s.push(next);
        }
        s
    }

    fn noisy_series(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|t| {
                let base = (t as f64 * 0.26).sin() * 40.0 + 90.0;
                base + rng.gen_range(-4.0..4.0)
            })
            .collect()
    }

    fn small_config() -> EdRvflConfig {
        EdRvflConfig { layers: 3, width: 20, window: 4, ridge_lambda: 1e-10, ..Default::default() }
    }

    #[test]
    fn recovers_exact_linear_dynamics() {
        let series = exact_ar_series(260);
        let model = EdRvflModel::train(small_config(), &series).unwrap();
        let preds = model.predict_series_one_step(&series).unwrap();
        let scale = series.iter().fold(f64::MIN, |a, b| a.max(b.abs()));
        for (p, a) in preds.iter().zip(&series[4..]) {
            assert!((p - a).abs() < 1e-6 * scale, "prediction {p} vs actual {a}");
        }
    }

    #[test]
    fn zero_penalty_takes_svd_path() {
        let series = exact_ar_series(120);
        let cfg = EdRvflConfig { ridge_lambda: 0.0, ..small_config() };
        let model = EdRvflModel::train(cfg, &series).unwrap();
        let preds = model.predict_series_one_step(&series).unwrap();
        for (p, a) in preds.iter().zip(&series[4..]) {
            assert!((p - a).abs() < 1e-6);
        }
    }

    #[test]
    fn direct_links_never_hurt_training_fit() {
        // At a vanishing penalty each layer's design contains the raw window,
        // so its least-squares residual can be no worse than regressing on
        // the window alone.
        let series = noisy_series(220, 11);
        let cfg =
            EdRvflConfig { layers: 4, width: 12, window: 6, ridge_lambda: 0.0, ..Default::default() };
        let model = EdRvflModel::train(cfg.clone(), &series).unwrap();

        let scaler = MinMaxScaler::fit(&series).unwrap();
        let scaled: Vec<f64> = series.iter().map(|v| scaler.transform(*v)).collect();
        let n = scaled.len() - cfg.window;
        let x = DMatrix::from_fn(n, cfg.window, |r, c| scaled[r + c]);
        let y = DVector::from_fn(n, |r, _| scaled[r + cfg.window]);
        let beta = ridge_solve(&x, &y, 0.0).unwrap();
        let baseline_rss = (&x * beta - &y).norm_squared();

        for layer in 0..cfg.layers {
            let mut rss = 0.0;
            for t in cfg.window..series.len() {
                let p = model.predict_layers(&series[t - cfg.window..t]).unwrap()[layer];
                let e = scaler.transform(p) - scaled[t];
                rss += e * e;
            }
            assert!(
                rss <= baseline_rss + 1e-9,
                "layer {layer} rss {rss} exceeds window-only baseline {baseline_rss}"
            );
        }
    }

    #[test]
    fn leading_layers_do_not_depend_on_depth() {
        let series = noisy_series(200, 3);
        let shallow = EdRvflModel::train(
            EdRvflConfig { layers: 2, width: 16, window: 8, seed: 42, ..Default::default() },
            &series,
        )
        .unwrap();
        let deep = EdRvflModel::train(
            EdRvflConfig { layers: 5, width: 16, window: 8, seed: 42, ..Default::default() },
            &series,
        )
        .unwrap();
        let window = &series[series.len() - 8..];
        let ps = shallow.predict_layers(window).unwrap();
        let pd = deep.predict_layers(window).unwrap();
        for l in 0..2 {
            assert!((ps[l] - pd[l]).abs() < 1e-12, "layer {l}: {} vs {}", ps[l], pd[l]);
        }
    }

    #[test]
    fn same_seed_reproduces_forecasts() {
        let series = noisy_series(220, 9);
        let cfg = EdRvflConfig { layers: 3, width: 24, window: 12, seed: 5, ..Default::default() };
        let a = EdRvflModel::train(cfg.clone(), &series).unwrap();
        let b = EdRvflModel::train(cfg.clone(), &series).unwrap();
        assert_eq!(a.forecast(&series, 23).unwrap(), b.forecast(&series, 23).unwrap());

        let other = EdRvflModel::train(EdRvflConfig { seed: 6, ..cfg }, &series).unwrap();
        assert_ne!(a.forecast(&series, 23).unwrap(), other.forecast(&series, 23).unwrap());
    }

    #[test]
    fn forecast_horizon_and_feedback() {
        let series = noisy_series(240, 21);
        let cfg = EdRvflConfig { layers: 2, width: 30, window: 24, ..Default::default() };
        let model = EdRvflModel::train(cfg, &series).unwrap();
        let fc = model.forecast(&series[..200], 23).unwrap();
        assert_eq!(fc.len(), 23);
        assert!(fc.iter().all(|v| v.is_finite()));
        // A smooth seasonal series should be tracked to well under its own
        // amplitude over a day ahead.
        let mse: f64 =
            fc.iter().zip(&series[200..223]).map(|(p, a)| (p - a) * (p - a)).sum::<f64>() / 23.0;
        assert!(mse.sqrt() < 40.0, "day-ahead rmse {}", mse.sqrt());
    }

    #[test]
    fn serialization_roundtrip_preserves_predictions() {
        let series = noisy_series(200, 13);
        let cfg = EdRvflConfig { layers: 3, width: 16, window: 10, ..Default::default() };
        let model = EdRvflModel::train(cfg, &series).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save_json(&path).unwrap();
        let loaded = EdRvflModel::load_json(&path).unwrap();
        assert_eq!(model.forecast(&series, 12).unwrap(), loaded.forecast(&series, 12).unwrap());
    }

    #[test]
    fn rejects_short_series_and_bad_config() {
        let cfg = EdRvflConfig { window: 48, ..Default::default() };
        assert!(EdRvflModel::train(cfg, &[1.0; 49]).is_err());
        let bad = EdRvflConfig { layers: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EdRvflConfig { ridge_lambda: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
