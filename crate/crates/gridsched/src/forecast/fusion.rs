//! Rank-based fusion of per-layer forecasts.
//!
//! Each layer gets an accuracy score from its previous-step error and a
//! diversity score from how far its current prediction sits from the other
//! layers and from the mid-accuracy layer. Both are converted to descending
//! ranks, blended with a trade-off weight, re-ranked, and normalized into
//! convex combination weights. Ranks break ties in favour of the
//! lower-indexed layer, which keeps the procedure deterministic.

/// Default accuracy/diversity trade-off.
pub const DEFAULT_ALPHA_TRADE: f64 = 0.6;

/// Contribution indicators explode as the previous error vanishes; cap them
/// so a perfect step cannot poison the arithmetic downstream.
const MAX_INDICATOR: f64 = 1e12;

/// Descending ranks with stable tie-breaking: the largest value gets rank
/// `L`, the smallest rank 1; equal values rank higher for lower indices.
fn rank_desc(values: &[f64]) -> Vec<f64> {
    let l = values.len();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; l];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = (l - pos) as f64;
    }
    ranks
}

/// Combination weights for the current step.
///
/// * `prev_errors[l]` — layer `l`'s signed error at the previous step
///   (prediction minus actual).
/// * `current_preds[l]` — layer `l`'s prediction for the current step.
/// * `alpha_trade` — weight of accuracy vs diversity in the blend.
///
/// Returns weights summing to one. With a single layer the weight is 1; use
/// uniform weights for the very first step, where no previous error exists.
pub fn fusion_weights(prev_errors: &[f64], current_preds: &[f64], alpha_trade: f64) -> Vec<f64> {
    let l = prev_errors.len();
    assert_eq!(l, current_preds.len(), "error and prediction vectors must align");
    assert!(l > 0);
    if l == 1 {
        return vec![1.0];
    }

    // Accuracy: inverse squared previous error, ranked descending.
    let f: Vec<f64> = prev_errors.iter().map(|e| (1.0 / (e * e)).min(MAX_INDICATOR)).collect();
    let acc_rank = rank_desc(&f);

    // Diversity part one: total distance to the other layers' predictions.
    let spread: Vec<f64> = current_preds
        .iter()
        .map(|p| current_preds.iter().map(|q| (p - q).abs()).sum::<f64>())
        .collect();
    let spread_rank = rank_desc(&spread);

    // Diversity part two: distance of the accuracy indicator from the layer
    // holding the middle accuracy rank.
    let mid_rank = (l as f64 / 2.0).ceil();
    let mid_layer = acc_rank.iter().position(|&r| r == mid_rank).expect("ranks are a permutation");
    let f_mid = f[mid_layer];
    let off_mid: Vec<f64> = f.iter().map(|fi| (fi - f_mid).abs()).collect();
    let off_mid_rank = rank_desc(&off_mid);

    // Blend the two diversity rankings, rank again.
    let combined: Vec<f64> = spread_rank.iter().zip(&off_mid_rank).map(|(a, b)| a + b).collect();
    let total: f64 = combined.iter().sum();
    let d: Vec<f64> = combined.iter().map(|c| c / total).collect();
    let div_rank = rank_desc(&d);

    // Final blend of accuracy and diversity ranks, ranked once more and
    // normalized into weights.
    let r: Vec<f64> = acc_rank
        .iter()
        .zip(&div_rank)
        .map(|(a, d)| alpha_trade * a + (1.0 - alpha_trade) * d)
        .collect();
    let final_rank = rank_desc(&r);
    let rank_sum: f64 = final_rank.iter().sum();
    final_rank.iter().map(|r| r / rank_sum).collect()
}

/// Uniform weights for steps with no error history.
pub fn uniform_weights(layers: usize) -> Vec<f64> {
    vec![1.0 / layers as f64; layers]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_three_layer_example() {
        // Errors (0.1, 0.2, 0.3) with collinear predictions:
        // accuracy ranks (3,2,1); all diversity spreads tie and resolve by
        // index; the middle accuracy rank (2) sits on layer 2, so off-mid
        // distances are (75, 0, 13.9) ranking (3,1,2); combined diversity
        // (6,3,3) -> d (0.5,0.25,0.25) -> ranks (3,2,1); blended ranks
        // (3,2,1) -> weights (1/2, 1/3, 1/6).
        let w = fusion_weights(&[0.1, 0.2, 0.3], &[5.0, 5.0, 5.0], 0.6);
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((w[2] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn weights_always_sum_to_one() {
        let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.5, -0.2, 0.1, 0.4], vec![1.0, 2.0, 3.0, 4.0]),
            (vec![0.0, 0.0], vec![7.0, 7.0]),
            (vec![1e-9, 5.0, -3.0], vec![2.0, 2.5, 1.5]),
        ];
        for (errs, preds) in cases {
            let w = fusion_weights(&errs, &preds, DEFAULT_ALPHA_TRADE);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn more_accurate_layer_gets_more_weight() {
        // Distinct errors, identical predictions: pure accuracy ordering.
        let w = fusion_weights(&[0.01, 0.5, 1.0, 2.0], &[3.0, 3.0, 3.0, 3.0], 1.0);
        assert!(w[0] > w[1] && w[1] > w[2] && w[2] > w[3]);
    }

    #[test]
    fn zero_error_is_capped_not_nan() {
        let w = fusion_weights(&[0.0, 0.1], &[1.0, 2.0], 0.6);
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_layer_degenerates_to_identity() {
        assert_eq!(fusion_weights(&[0.3], &[5.0], 0.6), vec![1.0]);
        assert_eq!(uniform_weights(4), vec![0.25; 4]);
    }

    #[test]
    fn rank_ties_prefer_lower_index() {
        let r = rank_desc(&[1.0, 1.0, 0.5]);
        assert_eq!(r, vec![3.0, 2.0, 1.0]);
    }
}
