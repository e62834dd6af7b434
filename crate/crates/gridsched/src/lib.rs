//! Desk-scale simulator and scheduling toolkit for a green-building microgrid
//! whose controllable side is a combined battery system: a stationary storage
//! unit plus an aggregated EV fleet, dispatched hourly against a time-of-use
//! tariff.
//!
//! The crate is layered bottom-up:
//!
//! * [`domain`] — tariff, load/PV profiles, battery dynamics, power-flow
//!   allocation and cash flow; all pure functions.
//! * [`degradation`] — rainflow cycle extraction and the calendar/cycle aging
//!   ledger that prices battery wear per scheduling episode.
//! * [`forecast`] — an ensemble deep random-feature network with rank-based
//!   output fusion, used for next-day net-load inputs.
//! * [`env`] — the scheduling MDP: state assembly, the 25-way joint action
//!   table, reward shaping, and the episode state machine.
//! * [`agent`] — dueling/double Q-learning with optional prioritized replay,
//!   on a hand-rolled feed-forward network (no external ML runtime).
//! * [`harness`] — synthetic scenario generation, the training loop, greedy
//!   evaluation, an uncontrolled baseline, a dynamic-programming oracle, and
//!   result export.
//! * [`config`] — TOML run configuration mapped onto all of the above.
//!
//! Every stochastic component takes an explicit seed; single-run execution is
//! single-threaded and bit-reproducible.

pub mod agent;
pub mod config;
pub mod degradation;
pub mod domain;
pub mod env;
pub mod error;
pub mod forecast;
pub mod harness;

pub use error::{Error, Result};
