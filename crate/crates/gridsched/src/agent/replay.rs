//! Experience replay: a ring buffer with either uniform or proportional
//! prioritized sampling.
//!
//! Priorities follow `p = |TD| + ψ` with the stored mass `p^α_per` kept in a
//! binary sum tree, so drawing an index proportional to its mass and
//! refreshing a priority are both logarithmic. New transitions enter at the
//! buffer's running maximum raw priority so each is visited at least once.
//! Importance weights `(1/(N·P))^α_dev` are normalized by the batch maximum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default capacity of the replay ring.
pub const DEFAULT_REPLAY_CAPACITY: usize = 10_000;
/// Priority exponent α_per.
pub const DEFAULT_ALPHA_PER: f64 = 0.95;
/// Priority floor ψ added to every |TD|.
pub const DEFAULT_PRIORITY_FLOOR: f64 = 0.001;

/// One stored interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Complete binary tree of leaf masses with internal sums.
#[derive(Debug, Clone)]
struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(capacity: usize) -> Self {
        SumTree { capacity, nodes: vec![0.0; 2 * capacity] }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    fn get(&self, leaf: usize) -> f64 {
        self.nodes[self.capacity + leaf]
    }

    /// Sets a leaf and recomputes ancestor sums exactly (no delta drift).
    fn set(&mut self, leaf: usize, mass: f64) {
        let mut i = self.capacity + leaf;
        self.nodes[i] = mass;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// Leaf whose cumulative interval contains `prefix` ∈ [0, total).
    fn descend(&self, mut prefix: f64) -> usize {
        let mut i = 1;
        while i < self.capacity {
            let left = self.nodes[2 * i];
            if prefix < left {
                i *= 2;
            } else {
                prefix -= left;
                i = 2 * i + 1;
            }
        }
        i - self.capacity
    }
}

/// How batches are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    Uniform,
    Prioritized,
}

/// Indices and bias-correction weights of one sampled batch.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub indices: Vec<usize>,
    /// Importance weights, max-normalized; all ones under uniform sampling.
    pub weights: Vec<f64>,
}

/// Ring buffer of transitions with pluggable sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    mode: SamplingMode,
    capacity: usize,
    alpha_per: f64,
    priority_floor: f64,
    items: Vec<Transition>,
    write_idx: usize,
    tree: SumTree,
    /// Running maximum of raw priority |TD| + ψ; assigned to new arrivals.
    max_raw_priority: f64,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, mode: SamplingMode, seed: u64) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            mode,
            capacity,
            alpha_per: DEFAULT_ALPHA_PER,
            priority_floor: DEFAULT_PRIORITY_FLOOR,
            items: Vec::with_capacity(capacity.min(4096)),
            write_idx: 0,
            tree: SumTree::new(capacity),
            max_raw_priority: 1.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_exponent(mut self, alpha_per: f64) -> Self {
        self.alpha_per = alpha_per;
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.items[index]
    }

    /// Appends (or overwrites oldest-first at capacity) with maximal
    /// current priority.
    pub fn push(&mut self, t: Transition) {
        let mass = self.max_raw_priority.powf(self.alpha_per);
        if self.items.len() < self.capacity {
            self.items.push(t);
            let leaf = self.items.len() - 1;
            self.tree.set(leaf, mass);
        } else {
            self.items[self.write_idx] = t;
            self.tree.set(self.write_idx, mass);
        }
        self.write_idx = (self.write_idx + 1) % self.capacity;
    }

    /// Draws `batch` independent indices with bias-correction weights.
    /// `alpha_dev` is the importance-weight exponent (ignored for uniform).
    pub fn sample(&mut self, batch: usize, alpha_dev: f64) -> Result<SampleBatch> {
        let n = self.items.len();
        if n == 0 {
            return Err(Error::invalid("replay buffer", "cannot sample while empty"));
        }
        let mut indices = Vec::with_capacity(batch);
        let mut weights = vec![1.0; batch];
        match self.mode {
            SamplingMode::Uniform => {
                for _ in 0..batch {
                    indices.push(self.rng.gen_range(0..n));
                }
            }
            SamplingMode::Prioritized => {
                let total = self.tree.total();
                if !(total > 0.0) {
                    return Err(Error::Numerical("replay priorities sum to zero".into()));
                }
                for w in weights.iter_mut() {
                    let leaf = self.tree.descend(self.rng.gen_range(0.0..total));
                    // Guard the edge where rounding walks past live leaves.
                    let leaf = leaf.min(n - 1);
                    let prob = self.tree.get(leaf) / total;
                    *w = (1.0 / (n as f64 * prob)).powf(alpha_dev);
                    indices.push(leaf);
                }
                let max_w = weights.iter().cloned().fold(f64::MIN, f64::max);
                for w in weights.iter_mut() {
                    *w /= max_w;
                }
            }
        }
        Ok(SampleBatch { indices, weights })
    }

    /// Refreshes priorities from post-update |TD| errors.
    pub fn update_priorities(&mut self, indices: &[usize], td_abs: &[f64]) {
        debug_assert_eq!(indices.len(), td_abs.len());
        for (&i, &td) in indices.iter().zip(td_abs) {
            let raw = td.abs() + self.priority_floor;
            self.max_raw_priority = self.max_raw_priority.max(raw);
            self.tree.set(i, raw.powf(self.alpha_per));
        }
    }

    /// Sampling probability of one stored item under the current masses.
    pub fn probability_of(&self, index: usize) -> f64 {
        self.tree.get(index) / self.tree.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: f64) -> Transition {
        Transition { state: vec![v; 4], action: 0, reward: v, next_state: vec![v; 4], terminal: false }
    }

    #[test]
    fn two_item_probability_matches_hand_arithmetic() {
        let mut buf = ReplayBuffer::new(8, SamplingMode::Prioritized, 1);
        buf.push(t(0.0));
        buf.push(t(1.0));
        buf.update_priorities(&[0, 1], &[1.0, 0.0]);
        // (1 + ψ)^0.95 vs ψ^0.95.
        let p0 = buf.probability_of(0);
        assert!((p0 - 0.9986).abs() < 1e-4, "P(0) = {p0}");
    }

    #[test]
    fn ring_evicts_oldest_first() {
        let mut buf = ReplayBuffer::new(3, SamplingMode::Uniform, 2);
        for i in 0..5 {
            buf.push(t(i as f64));
        }
        assert_eq!(buf.len(), 3);
        // Slots now hold items 3, 4, 2.
        let rewards: Vec<f64> = (0..3).map(|i| buf.get(i).reward).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn empirical_frequencies_track_priorities() {
        let mut buf = ReplayBuffer::new(4, SamplingMode::Prioritized, 3);
        for i in 0..4 {
            buf.push(t(i as f64));
        }
        buf.update_priorities(&[0, 1, 2, 3], &[0.1, 0.2, 0.4, 0.8]);
        let expected: Vec<f64> = (0..4).map(|i| buf.probability_of(i)).collect();
        let mut counts = [0usize; 4];
        let draws = 200_000;
        for _ in 0..draws / 32 {
            let batch = buf.sample(32, 0.5).unwrap();
            for i in batch.indices {
                counts[i] += 1;
            }
        }
        for i in 0..4 {
            let freq = counts[i] as f64 / draws as f64;
            let sigma = (expected[i] * (1.0 - expected[i]) / draws as f64).sqrt();
            assert!(
                (freq - expected[i]).abs() < 4.0 * sigma + 1e-4,
                "slot {i}: freq {freq} vs expected {}",
                expected[i]
            );
        }
    }

    #[test]
    fn equal_priorities_give_equal_weights() {
        let mut buf = ReplayBuffer::new(8, SamplingMode::Prioritized, 4);
        for i in 0..8 {
            buf.push(t(i as f64));
        }
        buf.update_priorities(&(0..8).collect::<Vec<_>>(), &[0.5; 8]);
        let batch = buf.sample(32, 0.7).unwrap();
        assert!(batch.weights.iter().all(|&w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_exponent_ignores_priorities() {
        let mut buf = ReplayBuffer::new(2, SamplingMode::Prioritized, 5).with_exponent(0.0);
        buf.push(t(0.0));
        buf.push(t(1.0));
        buf.update_priorities(&[0, 1], &[100.0, 0.0]);
        assert!((buf.probability_of(0) - 0.5).abs() < 1e-12);
        assert!((buf.probability_of(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn new_items_get_running_max_priority() {
        let mut buf = ReplayBuffer::new(8, SamplingMode::Prioritized, 6);
        buf.push(t(0.0));
        buf.update_priorities(&[0], &[3.0]);
        buf.push(t(1.0));
        // New arrival shares the running max raw priority (3.001).
        assert!((buf.probability_of(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampling_empty_buffer_errors() {
        let mut buf = ReplayBuffer::new(4, SamplingMode::Uniform, 7);
        assert!(buf.sample(4, 0.4).is_err());
    }

    #[test]
    fn uniform_mode_has_unit_weights_and_covers_items() {
        let mut buf = ReplayBuffer::new(16, SamplingMode::Uniform, 8);
        for i in 0..16 {
            buf.push(t(i as f64));
        }
        let mut seen = [false; 16];
        for _ in 0..200 {
            let b = buf.sample(16, 0.9).unwrap();
            assert!(b.weights.iter().all(|&w| w == 1.0));
            for i in b.indices {
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
