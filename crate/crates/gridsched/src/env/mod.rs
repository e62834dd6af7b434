//! Decision-process wrapper around the physical domain.
//!
//! Builds 51-number observations, decodes the 25 joint storage actions,
//! shapes rewards from price and demand context, and runs the 24-step
//! daily episode loop with EV session handling and full per-step tracing.

mod action;
mod environment;
mod reward;
mod state;
mod trace;

pub use action::{ActionTable, LEVELS_PER_DEVICE, N_ACTIONS};
pub use environment::{Environment, EpisodeInputs, StepOutcome};
pub use reward::{
    compute_price_ratios, compute_reward, degradation_weights, scaling_coefficients,
    RewardBreakdown, RewardInputs, EV_WEIGHT_DECAY, NET_RATIO_RANGE, PENALTY_WEIGHT,
    PRICE_RATIO_RANGE,
};
pub use state::{build_state, EnvState, StateScaler, NET_SCALE_FLOOR_KW, STATE_DIM};
pub use trace::{EpisodeTrace, TraceRow};
