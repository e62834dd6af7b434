//! Value network: a small fully connected net with hand-rolled backprop.
//!
//! The trunk is three rectified-linear layers; on top sits either a single
//! action-value head or a dueling pair (scalar state value plus one
//! advantage per action, summed as written, with optional mean-centering).
//! Parameters live in flat row-major buffers so the hot loops stay
//! contiguous, and the whole net serializes to JSON for checkpoints.
//!
//! Gradients are exact: `backward` consumes dL/dQ for one input and
//! accumulates parameter gradients, which an Adam step then applies. Tests
//! (and the acceptance suite) validate them against central differences.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dot product with four independent accumulators; keeps the dependency
/// chain short so the autovectorizer can use wide registers.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// `y += alpha * x`.
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// One fully connected layer, weights row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    in_dim: usize,
    out_dim: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Dense {
    fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        // Uniform fan-in scaling.
        let bound = 1.0 / (in_dim as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        Dense {
            in_dim,
            out_dim,
            w: (0..in_dim * out_dim).map(|_| dist.sample(rng)).collect(),
            b: (0..out_dim).map(|_| dist.sample(rng)).collect(),
        }
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (o, out_o) in out.iter_mut().enumerate() {
            *out_o = dot(&self.w[o * self.in_dim..(o + 1) * self.in_dim], x) + self.b[o];
        }
    }

    /// Accumulates parameter gradients and writes the input gradient.
    fn backward(&self, x: &[f64], dy: &[f64], dx: &mut [f64], gw: &mut [f64], gb: &mut [f64]) {
        dx.fill(0.0);
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            axpy(g, row, dx);
            axpy(g, x, &mut gw[o * self.in_dim..(o + 1) * self.in_dim]);
            gb[o] += g;
        }
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

/// Network shape and head style.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub n_actions: usize,
    /// Dueling head (state value + advantages) when true, single head
    /// otherwise.
    pub dueling: bool,
    /// Subtract the advantage mean inside the dueling sum. Off by default:
    /// the decomposition is used as written.
    pub center_advantage: bool,
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_width == 0 || self.n_actions == 0 {
            return Err(Error::invalid("network shape", "dimensions must be positive"));
        }
        if self.hidden_layers == 0 {
            return Err(Error::invalid("network shape", "need at least one hidden layer"));
        }
        Ok(())
    }
}

/// Scratch space for one forward/backward pass.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    /// Post-activation per trunk layer.
    acts: Vec<Vec<f64>>,
    /// Pre-activation per trunk layer (for the rectifier mask).
    pre: Vec<Vec<f64>>,
    value: f64,
    advantage: Vec<f64>,
    dq_head: Vec<f64>,
    dh: Vec<f64>,
    dh_prev: Vec<f64>,
}

/// Q-network with flat parameter access for optimizers and checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    config: NetConfig,
    trunk: Vec<Dense>,
    /// Single head when not dueling.
    q_head: Option<Dense>,
    value_head: Option<Dense>,
    advantage_head: Option<Dense>,
}

impl QNetwork {
    pub fn new(config: NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trunk = Vec::with_capacity(config.hidden_layers);
        let mut prev = config.input_dim;
        for _ in 0..config.hidden_layers {
            trunk.push(Dense::init(prev, config.hidden_width, &mut rng));
            prev = config.hidden_width;
        }
        let (q_head, value_head, advantage_head) = if config.dueling {
            (
                None,
                Some(Dense::init(prev, 1, &mut rng)),
                Some(Dense::init(prev, config.n_actions, &mut rng)),
            )
        } else {
            (Some(Dense::init(prev, config.n_actions, &mut rng)), None, None)
        };
        Ok(Self { config, trunk, q_head, value_head, advantage_head })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.trunk.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            pre: self.trunk.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            value: 0.0,
            advantage: vec![0.0; self.config.n_actions],
            dq_head: vec![0.0; self.config.n_actions],
            dh: vec![0.0; self.config.hidden_width],
            dh_prev: vec![0.0; self.config.hidden_width.max(self.config.input_dim)],
        }
    }

    /// Q-values for one state, keeping intermediates in `ws` for a
    /// subsequent [`QNetwork::backward`].
    pub fn forward(&self, x: &[f64], ws: &mut Workspace, q_out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.config.input_dim);
        debug_assert_eq!(q_out.len(), self.config.n_actions);
        for (i, layer) in self.trunk.iter().enumerate() {
            let (below, at) = ws.acts.split_at_mut(i);
            let input: &[f64] = if i == 0 { x } else { &below[i - 1] };
            let pre = &mut ws.pre[i];
            layer.forward(input, pre);
            for (ai, pi) in at[0].iter_mut().zip(pre.iter()) {
                *ai = pi.max(0.0);
            }
        }
        let top = ws.acts.last().expect("trunk is non-empty");
        match (&self.q_head, &self.value_head, &self.advantage_head) {
            (Some(q), None, None) => q.forward(top, q_out),
            (None, Some(v), Some(a)) => {
                let mut value = [0.0];
                v.forward(top, &mut value);
                ws.value = value[0];
                a.forward(top, &mut ws.advantage);
                let offset = if self.config.center_advantage {
                    ws.advantage.iter().sum::<f64>() / self.config.n_actions as f64
                } else {
                    0.0
                };
                for (qo, adv) in q_out.iter_mut().zip(&ws.advantage) {
                    *qo = ws.value + adv - offset;
                }
            }
            _ => unreachable!("exactly one head style is initialized"),
        }
    }

    /// Q-values without retaining a reusable workspace.
    pub fn q_values(&self, x: &[f64]) -> Vec<f64> {
        let mut ws = self.workspace();
        let mut q = vec![0.0; self.config.n_actions];
        self.forward(x, &mut ws, &mut q);
        q
    }

    /// Backpropagates dL/dQ for the input last passed through `forward`
    /// with this workspace, accumulating into `grads`.
    pub fn backward(&self, x: &[f64], dq: &[f64], ws: &mut Workspace, grads: &mut Gradients) {
        debug_assert_eq!(dq.len(), self.config.n_actions);
        let top_idx = self.trunk.len() - 1;
        let n = self.config.n_actions as f64;

        // Head gradients into ws.dh (gradient w.r.t. the top activation).
        ws.dh.fill(0.0);
        match (&self.q_head, &self.value_head, &self.advantage_head) {
            (Some(q), None, None) => {
                let gi = grads.head_index();
                q.backward(&ws.acts[top_idx], dq, &mut ws.dh, &mut grads.gw[gi], &mut grads.gb[gi]);
            }
            (None, Some(v), Some(a)) => {
                let dv = [dq.iter().sum::<f64>()];
                if self.config.center_advantage {
                    let mean = dq.iter().sum::<f64>() / n;
                    for (d, &g) in ws.dq_head.iter_mut().zip(dq) {
                        *d = g - mean;
                    }
                } else {
                    ws.dq_head.copy_from_slice(dq);
                }
                let gi = grads.head_index();
                v.backward(&ws.acts[top_idx], &dv, &mut ws.dh, &mut grads.gw[gi], &mut grads.gb[gi]);
                // Borrow scratch for the advantage head's input gradient.
                let dh_a = &mut ws.dh_prev[..self.config.hidden_width];
                a.backward(
                    &ws.acts[top_idx],
                    &ws.dq_head,
                    dh_a,
                    &mut grads.gw[gi + 1],
                    &mut grads.gb[gi + 1],
                );
                for (h, ha) in ws.dh.iter_mut().zip(dh_a.iter()) {
                    *h += *ha;
                }
            }
            _ => unreachable!(),
        }

        // Trunk backward, newest layer first.
        for i in (0..self.trunk.len()).rev() {
            // Rectifier mask.
            for (d, &p) in ws.dh.iter_mut().zip(&ws.pre[i]) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
            let below: &[f64] = if i == 0 { x } else { &ws.acts[i - 1] };
            let dx = &mut ws.dh_prev[..below.len()];
            self.trunk[i].backward(below, &ws.dh, dx, &mut grads.gw[i], &mut grads.gb[i]);
            if i > 0 {
                ws.dh.copy_from_slice(dx);
            }
        }
    }

    fn layers(&self) -> Vec<&Dense> {
        let mut all: Vec<&Dense> = self.trunk.iter().collect();
        if let Some(q) = &self.q_head {
            all.push(q);
        }
        if let Some(v) = &self.value_head {
            all.push(v);
        }
        if let Some(a) = &self.advantage_head {
            all.push(a);
        }
        all
    }

    fn layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut all: Vec<&mut Dense> = self.trunk.iter_mut().collect();
        if let Some(q) = &mut self.q_head {
            all.push(q);
        }
        if let Some(v) = &mut self.value_head {
            all.push(v);
        }
        if let Some(a) = &mut self.advantage_head {
            all.push(a);
        }
        all
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.param_count()).sum()
    }

    /// All parameters, trunk first then heads, weights before biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in self.layers() {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::invalid(
                "parameter vector",
                format!("expected {} values, got {}", self.param_count(), params.len()),
            ));
        }
        let mut offset = 0;
        for l in self.layers_mut() {
            let nw = l.w.len();
            l.w.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    /// Hard copy of all parameters (target-network sync).
    pub fn copy_parameters_from(&mut self, other: &QNetwork) {
        debug_assert_eq!(self.config, other.config);
        self.trunk.clone_from(&other.trunk);
        self.q_head.clone_from(&other.q_head);
        self.value_head.clone_from(&other.value_head);
        self.advantage_head.clone_from(&other.advantage_head);
    }
}

/// Per-layer gradient buffers mirroring a network's layout.
#[derive(Debug, Clone)]
pub struct Gradients {
    gw: Vec<Vec<f64>>,
    gb: Vec<Vec<f64>>,
    trunk_layers: usize,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        let layers = net.layers();
        Gradients {
            gw: layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            gb: layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
            trunk_layers: net.trunk.len(),
        }
    }

    fn head_index(&self) -> usize {
        self.trunk_layers
    }

    pub fn clear(&mut self) {
        for g in &mut self.gw {
            g.fill(0.0);
        }
        for g in &mut self.gb {
            g.fill(0.0);
        }
    }

    /// Flattened in the same order as [`QNetwork::flat_params`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.gw.iter().zip(&self.gb) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// Adaptive-moment optimizer state over the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    /// One update of `net` along `grads`.
    pub fn step(&mut self, net: &mut QNetwork, grads: &Gradients) -> Result<()> {
        let g = grads.flat();
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite gradient in optimizer step".into()));
        }
        let mut params = net.flat_params();
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        net.set_flat_params(&params)
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}
