//! Router-sender and home-agent-receiver state machines.
//!
//! Neither side sends a dedicated establishment message: the first data
//! packet on an adapter carries `(mr_id, if_num, seed)` in its header and the
//! HA derives the same key from its registration voucher. Address changes
//! bump the adapter's seed and rekey; the HA follows as soon as it sees an
//! authenticated packet from the new address (transmission mode) or a
//! single unacknowledged notification (notification mode).

mod ha;
mod mr;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::idnike::IdnikeError;
use crate::wire::WireError;

pub use ha::{HaEndpoint, InterfaceRecord, RegistrationRecord};
pub use mr::{InterfaceState, MrEndpoint};

/// 8-byte device identifier carried in every header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MrId(pub u64);

impl MrId {
    /// Maps a textual device name into the 8-byte identifier space.
    pub fn from_name(name: &str) -> Self {
        let digest = Sha256::digest(name.as_bytes());
        MrId(u64::from_be_bytes(digest[..8].try_into().unwrap()))
    }

    /// Bytes used as `ID_MR` inside identity labels.
    pub fn label_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }
}

impl fmt::Display for MrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Outcome of one packet at the home agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerdictReason {
    Accepted,
    AcceptedNewInterface,
    AcceptedAfterHandover,
    DropUnknownDevice,
    DropRevoked,
    DropSeedRollback,
    DropAuthFail,
    DropMalformed,
}

impl VerdictReason {
    pub const ALL: [VerdictReason; 8] = [
        VerdictReason::Accepted,
        VerdictReason::AcceptedNewInterface,
        VerdictReason::AcceptedAfterHandover,
        VerdictReason::DropUnknownDevice,
        VerdictReason::DropRevoked,
        VerdictReason::DropSeedRollback,
        VerdictReason::DropAuthFail,
        VerdictReason::DropMalformed,
    ];

    pub fn is_accepted(self) -> bool {
        matches!(
            self,
            VerdictReason::Accepted | VerdictReason::AcceptedNewInterface | VerdictReason::AcceptedAfterHandover
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictReason::Accepted => "accepted",
            VerdictReason::AcceptedNewInterface => "accepted_new_interface",
            VerdictReason::AcceptedAfterHandover => "accepted_after_handover",
            VerdictReason::DropUnknownDevice => "drop_unknown_device",
            VerdictReason::DropRevoked => "drop_revoked",
            VerdictReason::DropSeedRollback => "drop_seed_rollback",
            VerdictReason::DropAuthFail => "drop_auth_fail",
            VerdictReason::DropMalformed => "drop_malformed",
        }
    }
}

impl fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndpointError {
    #[error("adapter {0} is already up")]
    DuplicateInterface(u8),
    #[error("adapter {0} is not tracked")]
    UnknownInterface(u8),
    #[error("adapter {0} already uses that address")]
    SameAddress(u8),
    #[error("router {0} already has an active registration")]
    DuplicateRegistration(MrId),
    #[error("router {0} is not registered")]
    UnknownDevice(MrId),
    #[error("registration voucher must be a home-agent private point")]
    WrongVoucher,
    #[error(transparent)]
    Crypto(#[from] IdnikeError),
    #[error(transparent)]
    Wire(#[from] WireError),
}
