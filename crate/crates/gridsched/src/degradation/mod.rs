//! Battery aging engine: rainflow cycle extraction, chemistry-specific
//! stress-to-fade laws, a per-device lifetime ledger, and the economic layer
//! that turns realized fade into scheduling costs.

mod chemistry;
mod cost;
mod ledger;
mod rainflow;

pub use chemistry::{ChemistryParams, DodStressForm};
pub use cost::{
    EpisodeCosts, WearPricing, DEFAULT_ESS_REPLACEMENT_COST_PER_KWH,
    DEFAULT_EV_REPLACEMENT_COST_PER_KWH, DEFAULT_INITIAL_ALPHA_ESS, DEFAULT_INITIAL_ALPHA_EV,
};
pub use ledger::{apply_episode_aging, AgingLedger, EpisodeAging, EOL_SOH};
pub use rainflow::{rainflow_count, CycleRecord};
