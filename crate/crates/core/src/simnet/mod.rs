//! Deterministic discrete-event simulator for one mobile router, its access
//! links and the home agent.
//!
//! Time is kept in integer microseconds, the event queue breaks ties by
//! insertion order, and all randomness comes from one seeded stream per
//! trial, so a `(scenario, seed)` pair always yields the same report.

use thiserror::Error;

pub mod edpf;
pub mod link;
pub mod metrics;
pub mod reorder;
pub mod runner;
pub mod scenario;
pub mod traffic;

pub use edpf::{edpf_pick, edpf_pick_among, estimated_delivery};
pub use link::{LinkProfile, LinkState};
pub use metrics::{GoodputSample, MetricsReport, OwdSample, PacketCounts};
pub use reorder::ReorderBuffer;
pub use runner::{data_wire_bytes, run_scenario};
pub use scenario::{CryptoCosts, HandoverMode, Scenario, Scheme, StopOn, TrafficConfig, TrafficKind};
pub use traffic::{cbr_generator, probe_generator};

use crate::endpoints::EndpointError;
use crate::ike::IkeError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error(transparent)]
    Ike(#[from] IkeError),
}
