//! Deterministic slotted-time simulator for channel selection and data
//! dissemination in multi-hop cognitive radio (CR) ad hoc networks.
//!
//! A run places CR nodes on the unit square, drives primary-radio (PR)
//! activity per channel with ON/OFF Markov chains, lets every node pick a
//! channel each slot with one of four strategies (SURF, RD, SB, CA), and
//! floods TTL-bounded messages. Everything observable is recorded in a
//! [`SimTrace`](engine::trace::SimTrace); all metrics are computed from it.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod output;
pub mod rng;
pub mod spectrum;
pub mod strategy;
pub mod sweep;
pub mod topology;

pub use config::ScenarioConfig;
pub use engine::run_dissemination;
pub use engine::trace::SimTrace;
pub use error::{Result, SimError};
pub use metrics::MetricsReport;
pub use strategy::StrategyKind;
