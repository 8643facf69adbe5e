//! Stateless, identity-based network-layer authentication for mobile
//! multihomed routers (MR) talking to a fixed home agent (HA).
//!
//! The crate is organised bottom-up:
//!
//! * [`idnike`]: pairing-based identity-based non-interactive key
//!   derivation (master secrets, private points, shared material, PRF).
//! * [`wire`]: the 47-byte authentication header and the HMAC over the
//!   immutable part of the simulated IP packet.
//! * [`endpoints`]: MR sender and HA receiver state machines.
//! * [`ike`]: message-level IKEv2, MOBIKE and AH baseline model.
//! * [`simnet`]: deterministic discrete-event multipath simulator.
//! * [`harness`]: benchmark drivers and the crypto self-test behind the CLI.

#![forbid(unsafe_code)]
#![warn(rust_2018_idioms)]

pub mod endpoints;
pub mod harness;
pub mod idnike;
pub mod ike;
pub mod simnet;
pub mod time;
pub mod wire;

pub use endpoints::{EndpointError, HaEndpoint, MrEndpoint, MrId, VerdictReason};
pub use idnike::{
    HashedIdentity, IdentityLabel, IdnikeError, MasterSecret, PairingSuite, PrivatePoint, SecurityLevel, SessionKey,
    SharedMaterial,
};
pub use ike::{IkeConfig, IkeError, IkeSession, IkeState};
pub use simnet::{run_scenario, LinkProfile, MetricsReport, Scenario, Scheme, SimError};
pub use time::SimTime;
pub use wire::{NimsaHeader, NimsaPacket, WireError};
