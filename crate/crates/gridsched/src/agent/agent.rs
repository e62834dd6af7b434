//! The value-based learner: ε-greedy control, bootstrapped targets, one
//! adaptive-moment step per environment step, and episode-boundary
//! bookkeeping (exploration decay, importance annealing, target sync).
//!
//! Four ablation variants share this implementation: the plain learner
//! (single head, uniform replay, max-bootstrap), the double variant
//! (decoupled action selection), the dueling double variant, and the full
//! configuration adding prioritized replay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

use super::network::{Adam, Gradients, NetConfig, QNetwork, Workspace};
use super::replay::{
    ReplayBuffer, SamplingMode, Transition, DEFAULT_ALPHA_PER, DEFAULT_PRIORITY_FLOOR,
    DEFAULT_REPLAY_CAPACITY,
};

/// Ablation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Dqn,
    D2qn,
    D3qn,
    D3qnPer,
}

impl Variant {
    /// Double-Q bootstrap (online argmax, target value).
    pub fn double(self) -> bool {
        !matches!(self, Variant::Dqn)
    }

    /// Dueling value/advantage heads.
    pub fn dueling(self) -> bool {
        matches!(self, Variant::D3qn | Variant::D3qnPer)
    }

    /// Prioritized replay.
    pub fn prioritized(self) -> bool {
        matches!(self, Variant::D3qnPer)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dqn" => Ok(Variant::Dqn),
            "d2qn" => Ok(Variant::D2qn),
            "d3qn" => Ok(Variant::D3qn),
            "d3qnper" | "d3qn-per" => Ok(Variant::D3qnPer),
            other => Err(Error::invalid(
                "variant",
                format!("unknown '{other}' (expected dqn, d2qn, d3qn, or d3qnper)"),
            )),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dqn => "dqn",
            Variant::D2qn => "d2qn",
            Variant::D3qn => "d3qn",
            Variant::D3qnPer => "d3qnper",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training hyper-parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Target sync period in episodes; sync fires when the 1-based episode
    /// count is ≡ 1 modulo this.
    pub target_sync_period: usize,
    /// Per-episode multiplicative exploration decay.
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub replay_capacity: usize,
    pub alpha_per: f64,
    pub priority_floor: f64,
    /// Importance-weight exponent anneals linearly across the episode
    /// budget from `.0` to `.1`.
    pub alpha_dev_range: (f64, f64),
    /// Episodes the annealing schedule spans.
    pub episode_budget: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub center_advantage: bool,
    pub seed: u64,
}

impl AgentConfig {
    pub fn new(variant: Variant, episode_budget: usize, seed: u64) -> Self {
        AgentConfig {
            variant,
            gamma: 0.99,
            learning_rate: 2.5e-4,
            batch_size: 32,
            target_sync_period: 16,
            epsilon_decay: 0.99,
            epsilon_min: 0.05,
            replay_capacity: DEFAULT_REPLAY_CAPACITY,
            alpha_per: DEFAULT_ALPHA_PER,
            priority_floor: DEFAULT_PRIORITY_FLOOR,
            alpha_dev_range: (0.4, 0.99),
            episode_budget,
            hidden_width: 128,
            hidden_layers: 3,
            center_advantage: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) && self.gamma != 1.0 {
            return Err(Error::invalid("gamma", "must be in (0, 1]"));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate", "must be positive"));
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return Err(Error::invalid("batch size", "must fit in the replay buffer"));
        }
        if self.target_sync_period == 0 {
            return Err(Error::invalid("target sync period", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay) {
            return Err(Error::invalid("epsilon decay", "must be in [0, 1]"));
        }
        if self.episode_budget == 0 {
            return Err(Error::invalid("episode budget", "must be positive"));
        }
        Ok(())
    }
}

/// Saved learner state: both parameter sets, optimizer moments, and the
/// episode counter the schedules derive from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub config: AgentConfig,
    pub state_dim: usize,
    pub n_actions: usize,
    pub online: QNetwork,
    pub target: QNetwork,
    pub optimizer: Adam,
    pub episodes_completed: usize,
    pub epsilon: f64,
}

/// The learner.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    config: AgentConfig,
    state_dim: usize,
    n_actions: usize,
    online: QNetwork,
    target: QNetwork,
    optimizer: Adam,
    pub buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    episodes_completed: usize,
    ws: Workspace,
    grads: Gradients,
}

impl DqnAgent {
    pub fn new(config: AgentConfig, state_dim: usize, n_actions: usize) -> Result<Self> {
        config.validate()?;
        let net_config = NetConfig {
            input_dim: state_dim,
            hidden_width: config.hidden_width,
            hidden_layers: config.hidden_layers,
            n_actions,
            dueling: config.variant.dueling(),
            center_advantage: config.center_advantage,
        };
        let online = QNetwork::new(net_config, config.seed)?;
        let mut target = online.clone();
        target.copy_parameters_from(&online);
        let mode = if config.variant.prioritized() {
            SamplingMode::Prioritized
        } else {
            SamplingMode::Uniform
        };
        let buffer = ReplayBuffer::new(config.replay_capacity, mode, config.seed ^ 0x9e3779b9)
            .with_exponent(config.alpha_per);
        let optimizer = Adam::new(config.learning_rate, online.param_count());
        let ws = online.workspace();
        let grads = Gradients::zeros_like(&online);
        let action_seed = config.seed.wrapping_add(0x5eed);
        Ok(DqnAgent {
            config,
            state_dim,
            n_actions,
            online,
            target,
            optimizer,
            buffer,
            rng: ChaCha8Rng::seed_from_u64(action_seed),
            episodes_completed: 0,
            ws,
            grads,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn episodes_completed(&self) -> usize {
        self.episodes_completed
    }

    /// Exploration rate for the episode currently being played:
    /// `max(ε_min, decay^episodes_completed)`.
    pub fn epsilon(&self) -> f64 {
        self.config
            .epsilon_min
            .max(self.config.epsilon_decay.powi(self.episodes_completed as i32))
    }

    /// Importance-weight exponent for the current episode; linear from the
    /// range start to its end across the episode budget.
    pub fn alpha_dev(&self) -> f64 {
        let (lo, hi) = self.config.alpha_dev_range;
        let progress =
            (self.episodes_completed as f64 / self.config.episode_budget as f64).min(1.0);
        lo + (hi - lo) * progress
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.online.q_values(state)
    }

    /// Greedy action over unmasked entries, ties to the lowest index.
    pub fn greedy_action(&self, state: &[f64], mask: &[bool]) -> Result<usize> {
        let q = self.online.q_values(state);
        let mut best: Option<(usize, f64)> = None;
        for (i, (&qi, &ok)) in q.iter().zip(mask).enumerate() {
            if ok && best.map_or(true, |(_, bq)| qi > bq) {
                best = Some((i, qi));
            }
        }
        best.map(|(i, _)| i).ok_or_else(|| Error::invalid("action mask", "no action available"))
    }

    /// ε-greedy action over unmasked entries.
    pub fn select_action(&mut self, state: &[f64], mask: &[bool]) -> Result<usize> {
        if self.rng.gen::<f64>() < self.epsilon() {
            let open: Vec<usize> =
                mask.iter().enumerate().filter_map(|(i, &ok)| ok.then_some(i)).collect();
            if open.is_empty() {
                return Err(Error::invalid("action mask", "no action available"));
            }
            Ok(open[self.rng.gen_range(0..open.len())])
        } else {
            self.greedy_action(state, mask)
        }
    }

    /// Bootstrapped regression target for one transition.
    pub fn td_target(&self, reward: f64, next_state: &[f64], terminal: bool) -> f64 {
        if terminal {
            return reward;
        }
        let target_q = self.target.q_values(next_state);
        let bootstrap = if self.config.variant.double() {
            let online_q = self.online.q_values(next_state);
            let a_star = argmax(&online_q);
            target_q[a_star]
        } else {
            target_q[argmax(&target_q)]
        };
        reward + self.config.gamma * bootstrap
    }

    /// Stores one transition.
    pub fn observe(&mut self, transition: Transition) {
        debug_assert_eq!(transition.state.len(), self.state_dim);
        self.buffer.push(transition);
    }

    /// One optimization step over a sampled batch. Returns `None` until the
    /// buffer holds a full batch, otherwise the mean |TD error|.
    pub fn learn_step(&mut self) -> Result<Option<f64>> {
        let batch_size = self.config.batch_size;
        if self.buffer.len() < batch_size {
            return Ok(None);
        }
        let alpha_dev = self.alpha_dev();
        let batch = self.buffer.sample(batch_size, alpha_dev)?;

        self.grads.clear();
        let mut td_abs = Vec::with_capacity(batch_size);
        let mut q = vec![0.0; self.n_actions];
        let mut dq = vec![0.0; self.n_actions];
        let inv_batch = 1.0 / batch_size as f64;
        let mut mean_td = 0.0;

        for (&idx, &weight) in batch.indices.iter().zip(&batch.weights) {
            let (y, state, action) = {
                let item = self.buffer.get(idx);
                (self.td_target(item.reward, &item.next_state, item.terminal), item.state.clone(), item.action)
            };
            self.online.forward(&state, &mut self.ws, &mut q);
            let td = y - q[action];
            if !td.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite TD error (target {y}, Q {})",
                    q[action]
                )));
            }
            // d/dQ of mean((ϑ·(y − Q))²) over the batch.
            dq.fill(0.0);
            dq[action] = -2.0 * weight * weight * td * inv_batch;
            self.online.backward(&state, &dq, &mut self.ws, &mut self.grads);
            td_abs.push(td.abs());
            mean_td += td.abs() * inv_batch;
        }

        self.optimizer.step(&mut self.online, &self.grads)?;
        if self.buffer.mode() == SamplingMode::Prioritized {
            self.buffer.update_priorities(&batch.indices, &td_abs);
        }
        Ok(Some(mean_td))
    }

    /// Marks the end of an episode: advances the schedules and syncs the
    /// target exactly when the 1-based episode count ≡ 1 (mod period).
    /// Returns whether a sync happened.
    pub fn end_episode(&mut self) -> bool {
        self.episodes_completed += 1;
        let sync = self.episodes_completed % self.config.target_sync_period == 1
            || self.config.target_sync_period == 1;
        if sync {
            self.target.copy_parameters_from(&self.online);
        }
        sync
    }

    pub fn to_checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            config: self.config.clone(),
            state_dim: self.state_dim,
            n_actions: self.n_actions,
            online: self.online.clone(),
            target: self.target.clone(),
            optimizer: self.optimizer.clone(),
            episodes_completed: self.episodes_completed,
            epsilon: self.epsilon(),
        }
    }

    pub fn from_checkpoint(doc: AgentCheckpoint) -> Result<Self> {
        doc.config.validate()?;
        let mode = if doc.config.variant.prioritized() {
            SamplingMode::Prioritized
        } else {
            SamplingMode::Uniform
        };
        let buffer =
            ReplayBuffer::new(doc.config.replay_capacity, mode, doc.config.seed ^ 0x9e3779b9)
                .with_exponent(doc.config.alpha_per);
        let ws = doc.online.workspace();
        let grads = Gradients::zeros_like(&doc.online);
        let rng = ChaCha8Rng::seed_from_u64(doc.config.seed.wrapping_add(0x5eed));
        Ok(DqnAgent {
            config: doc.config,
            state_dim: doc.state_dim,
            n_actions: doc.n_actions,
            online: doc.online,
            target: doc.target,
            optimizer: doc.optimizer,
            buffer,
            rng,
            episodes_completed: doc.episodes_completed,
            ws,
            grads,
        })
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), &self.to_checkpoint())?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let doc: AgentCheckpoint = serde_json::from_reader(std::io::BufReader::new(file))?;
        Self::from_checkpoint(doc)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
