//! Three-point rainflow cycle extraction over an SoC trajectory.
//!
//! Standard reversal-counting scheme: monotone runs collapse to turning
//! points, nested deflections are closed as full cycles, a deflection that
//! still contains the start of the record closes as a half cycle, and
//! whatever remains when the record ends is swept out as half cycles. Every
//! segment of the turning-point sequence therefore ends up in exactly one
//! cycle, which the tests pin via the weight identity.

use serde::{Deserialize, Serialize};

/// One extracted cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Depth of discharge: SoC swing of the cycle, in [0, 1].
    pub depth: f64,
    /// Midpoint SoC of the swing.
    pub mean_soc: f64,
    /// 1.0 for a closed cycle, 0.5 for a half cycle.
    pub weight: f64,
    /// Wall-clock span of the swing in seconds (a closed cycle covers the
    /// round trip, i.e. twice its half-swing span).
    pub duration_s: f64,
}

/// Collapses a sampled series into turning points, keeping sample indices.
/// Plateaus extend the current run; interior monotone samples are dropped.
fn turning_points(series: &[f64]) -> Vec<(f64, usize)> {
    let mut tp: Vec<(f64, usize)> = Vec::new();
    for (i, &v) in series.iter().enumerate() {
        match tp.len() {
            0 => tp.push((v, i)),
            1 => {
                if v != tp[0].0 {
                    tp.push((v, i));
                }
            }
            n => {
                let prev = tp[n - 1].0;
                if v == prev {
                    continue;
                }
                let prev_dir = (prev - tp[n - 2].0) > 0.0;
                let dir = (v - prev) > 0.0;
                if dir == prev_dir {
                    // Monotone run continues: move the reversal forward.
                    tp[n - 1] = (v, i);
                } else {
                    tp.push((v, i));
                }
            }
        }
    }
    tp
}

fn record(a: (f64, usize), b: (f64, usize), weight: f64, dt_step_s: f64) -> CycleRecord {
    let span = (b.1 as f64 - a.1 as f64).abs() * dt_step_s;
    CycleRecord {
        depth: (b.0 - a.0).abs(),
        mean_soc: 0.5 * (a.0 + b.0),
        weight,
        duration_s: if weight == 1.0 { 2.0 * span } else { span },
    }
}

/// Extracts rainflow cycles from an SoC trajectory sampled every
/// `dt_step_s` seconds. A constant series yields no cycles.
pub fn rainflow_count(series: &[f64], dt_step_s: f64) -> Vec<CycleRecord> {
    let tp = turning_points(series);
    let mut out = Vec::new();
    let mut stack: Vec<(f64, usize)> = Vec::new();
    for &p in &tp {
        stack.push(p);
        while stack.len() >= 3 {
            let n = stack.len();
            let x = (stack[n - 1].0 - stack[n - 2].0).abs();
            let y = (stack[n - 2].0 - stack[n - 3].0).abs();
            if x < y {
                break;
            }
            if n == 3 {
                // The candidate range still contains the record start:
                // close it as a half cycle and discard the start.
                out.push(record(stack[0], stack[1], 0.5, dt_step_s));
                stack.remove(0);
            } else {
                out.push(record(stack[n - 3], stack[n - 2], 1.0, dt_step_s));
                stack.drain(n - 3..n - 1);
            }
        }
    }
    // Residual alternating tail: every remaining segment is a half cycle.
    for w in stack.windows(2) {
        out.push(record(w[0], w[1], 0.5, dt_step_s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_weight(recs: &[CycleRecord]) -> f64 {
        recs.iter().map(|r| r.weight).sum()
    }

    #[test]
    fn single_excursion_makes_two_halves() {
        let recs = rainflow_count(&[0.5, 1.0, 0.5], 3600.0);
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert_eq!(r.weight, 0.5);
            assert!((r.depth - 0.5).abs() < 1e-15);
            assert!((r.mean_soc - 0.75).abs() < 1e-15);
            assert_eq!(r.duration_s, 3600.0);
        }
    }

    #[test]
    fn nested_cycle_closes_full() {
        let recs = rainflow_count(&[0.2, 0.8, 0.4, 0.6, 0.2], 3600.0);
        let fulls: Vec<_> = recs.iter().filter(|r| r.weight == 1.0).collect();
        let halves: Vec<_> = recs.iter().filter(|r| r.weight == 0.5).collect();
        assert_eq!(fulls.len(), 1);
        assert!((fulls[0].depth - 0.2).abs() < 1e-15);
        assert!((fulls[0].mean_soc - 0.5).abs() < 1e-15);
        assert_eq!(fulls[0].duration_s, 2.0 * 3600.0);
        assert_eq!(halves.len(), 2);
        for h in halves {
            assert!((h.depth - 0.6).abs() < 1e-15);
            assert!((h.mean_soc - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_series_has_no_cycles() {
        assert!(rainflow_count(&[0.5; 24], 3600.0).is_empty());
        assert!(rainflow_count(&[0.5], 3600.0).is_empty());
        assert!(rainflow_count(&[], 3600.0).is_empty());
    }

    #[test]
    fn plateaus_do_not_create_cycles() {
        // Same reversals as the nested case, with flats inserted.
        let recs = rainflow_count(&[0.2, 0.2, 0.8, 0.8, 0.4, 0.6, 0.6, 0.2], 3600.0);
        assert!((total_weight(&recs) - 2.0).abs() < 1e-15);
        assert_eq!(recs.iter().filter(|r| r.weight == 1.0).count(), 1);
    }

    #[test]
    fn weight_identity_matches_reversal_count() {
        // 2 * total weight == number of turning-point segments.
        let series = [0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 0.85, 0.15, 0.6];
        let recs = rainflow_count(&series, 60.0);
        let tp = turning_points(&series);
        assert!((2.0 * total_weight(&recs) - (tp.len() as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn monotone_series_is_one_half_cycle() {
        let recs = rainflow_count(&[0.1, 0.3, 0.5, 0.7, 0.9], 3600.0);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].weight, 0.5);
        assert!((recs[0].depth - 0.8).abs() < 1e-15);
        assert_eq!(recs[0].duration_s, 4.0 * 3600.0);
    }
}
