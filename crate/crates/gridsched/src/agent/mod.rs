//! Value-based learning: network, replay, and the training loop's agent.

mod agent;
mod network;
mod replay;

pub use agent::{AgentCheckpoint, AgentConfig, DqnAgent, Variant};
pub use network::{Adam, Gradients, NetConfig, QNetwork, Workspace};
pub use replay::{
    ReplayBuffer, SampleBatch, SamplingMode, Transition, DEFAULT_ALPHA_PER,
    DEFAULT_PRIORITY_FLOOR, DEFAULT_REPLAY_CAPACITY,
};
