//! Message-level IKEv2 baseline: the initial two-exchange ladder, the MOBIKE
//! address update plus rekey, and AH-style per-packet integrity.
//!
//! Nothing here runs real Diffie-Hellman or parses certificates. The model only
//! has to reproduce the timing structure (round trips, retransmission timers,
//! message sizes) that NIMSA is compared against. The initiator is sans-IO:
//! every input returns a list of [`IkeAction`]s for the caller to execute.

use std::net::Ipv4Addr;

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::time::SimTime;
use crate::wire::ImmutableIpFields;

type HmacSha256 = Hmac<Sha256>;

/// SPI (4) + sequence number (4) + ICV (32).
pub const AH_OVERHEAD_BYTES: usize = 40;
pub const AH_ICV_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IkeError {
    #[error("operation not valid in state {0:?}")]
    WrongState(IkeState),
    #[error("invalid IKE config: {0}")]
    Config(&'static str),
}

/// Sizes of the two MOBIKE exchanges (request and response use the same size).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RekeySizes {
    pub update_bytes: u32,
    pub rekey_bytes: u32,
}

impl Default for RekeySizes {
    fn default() -> Self {
        RekeySizes { update_bytes: 200, rekey_bytes: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IkeConfig {
    pub init_req_bytes: u32,
    pub init_resp_bytes: u32,
    pub auth_req_bytes: u32,
    pub auth_resp_bytes: u32,
    pub rto_initial_ms: f64,
    pub rto_backoff: f64,
    pub max_retries: u32,
    pub rekey_exchange_bytes: RekeySizes,
    pub per_packet_overhead_bytes: u32,
    /// Constant cost of handling one IKE message at either end.
    pub processing_ms: f64,
    /// Constant cost of one AH protect or verify.
    pub ah_hmac_ms: f64,
}

impl Default for IkeConfig {
    fn default() -> Self {
        IkeConfig {
            init_req_bytes: 500,
            init_resp_bytes: 500,
            auth_req_bytes: 1100,
            auth_resp_bytes: 1100,
            rto_initial_ms: 500.0,
            rto_backoff: 2.0,
            max_retries: 5,
            rekey_exchange_bytes: RekeySizes::default(),
            per_packet_overhead_bytes: AH_OVERHEAD_BYTES as u32,
            processing_ms: 2.0,
            ah_hmac_ms: 0.02,
        }
    }
}

impl IkeConfig {
    pub fn validate(&self) -> Result<(), IkeError> {
        let sizes = [
            self.init_req_bytes,
            self.init_resp_bytes,
            self.auth_req_bytes,
            self.auth_resp_bytes,
            self.rekey_exchange_bytes.update_bytes,
            self.rekey_exchange_bytes.rekey_bytes,
            self.per_packet_overhead_bytes,
        ];
        if sizes.contains(&0) {
            return Err(IkeError::Config("message sizes must be positive"));
        }
        if !(self.rto_initial_ms > 0.0 && self.rto_initial_ms.is_finite()) {
            return Err(IkeError::Config("rto_initial_ms must be positive"));
        }
        if !(self.rto_backoff >= 1.0 && self.rto_backoff.is_finite()) {
            return Err(IkeError::Config("rto_backoff must be >= 1"));
        }
        if self.max_retries < 1 {
            return Err(IkeError::Config("max_retries must be >= 1"));
        }
        if !(self.processing_ms >= 0.0 && self.ah_hmac_ms >= 0.0) {
            return Err(IkeError::Config("processing costs must be non-negative"));
        }
        Ok(())
    }

    pub fn size_of(&self, kind: IkeMsgKind) -> u32 {
        use IkeMsgKind::*;
        match kind {
            InitReq => self.init_req_bytes,
            InitResp => self.init_resp_bytes,
            AuthReq => self.auth_req_bytes,
            AuthResp => self.auth_resp_bytes,
            UpdateReq | UpdateResp => self.rekey_exchange_bytes.update_bytes,
            RekeyReq | RekeyResp => self.rekey_exchange_bytes.rekey_bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IkeMsgKind {
    InitReq,
    InitResp,
    AuthReq,
    AuthResp,
    UpdateReq,
    UpdateResp,
    RekeyReq,
    RekeyResp,
}

impl IkeMsgKind {
    pub fn is_request(self) -> bool {
        matches!(self, Self::InitReq | Self::AuthReq | Self::UpdateReq | Self::RekeyReq)
    }

    /// The response that answers this request.
    pub fn response(self) -> Option<IkeMsgKind> {
        use IkeMsgKind::*;
        Some(match self {
            InitReq => InitResp,
            AuthReq => AuthResp,
            UpdateReq => UpdateResp,
            RekeyReq => RekeyResp,
            _ => return None,
        })
    }
}

/// One control message. `msg_id` follows IKEv2 semantics: each exchange gets
/// the next id and retransmissions reuse it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IkeMessage {
    pub kind: IkeMsgKind,
    pub msg_id: u32,
    pub size_bytes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IkeState {
    Idle,
    InitSent,
    AuthSent,
    Established,
    UpdateSent,
    RekeySent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IkeAction {
    Send(IkeMessage),
    /// Schedule [`IkeSession::on_timeout`] with this generation at `at`.
    ArmTimer {
        at: SimTime,
        generation: u64,
    },
    Established {
        at: SimTime,
    },
    HandoverComplete {
        at: SimTime,
        latency: SimTime,
    },
    /// Retries exhausted; the session is back in `Idle`.
    Failed {
        at: SimTime,
        during: IkeState,
    },
}

/// Initiator side (the MR).
#[derive(Debug, Clone)]
pub struct IkeSession {
    config: IkeConfig,
    state: IkeState,
    current_ip: Ipv4Addr,
    retry_count: u32,
    rto: SimTime,
    established_at: Option<SimTime>,
    next_msg_id: u32,
    in_flight: Option<IkeMessage>,
    timer_generation: u64,
    handover_started: Option<SimTime>,
    queued_handover: Option<(Ipv4Addr, SimTime)>,
    sa_generation: u32,
    ah_seq: u32,
}

impl IkeSession {
    pub fn new(config: IkeConfig, ip: Ipv4Addr) -> Result<Self, IkeError> {
        config.validate()?;
        let rto = SimTime::from_millis_f64(config.rto_initial_ms);
        Ok(IkeSession {
            config,
            state: IkeState::Idle,
            current_ip: ip,
            retry_count: 0,
            rto,
            established_at: None,
            next_msg_id: 0,
            in_flight: None,
            timer_generation: 0,
            handover_started: None,
            queued_handover: None,
            sa_generation: 0,
            ah_seq: 0,
        })
    }

    pub fn config(&self) -> &IkeConfig {
        &self.config
    }

    pub fn state(&self) -> IkeState {
        self.state
    }

    pub fn current_ip(&self) -> Ipv4Addr {
        self.current_ip
    }

    pub fn retry_count(&self) -> u32 {
        self.retry_count
    }

    pub fn established_at(&self) -> Option<SimTime> {
        self.established_at
    }

    /// Data may flow only while a usable SA exists and no exchange is pending.
    pub fn can_send_data(&self) -> bool {
        self.state == IkeState::Established
    }

    pub fn initiate(&mut self, now: SimTime) -> Result<Vec<IkeAction>, IkeError> {
        if self.state != IkeState::Idle {
            return Err(IkeError::WrongState(self.state));
        }
        self.established_at = None;
        Ok(self.start_exchange(IkeMsgKind::InitReq, IkeState::InitSent, now))
    }

    /// Starts the MOBIKE address update. Outside `Established` the request is
    /// queued and runs as soon as the SA comes up.
    pub fn mobike_handover(&mut self, new_ip: Ipv4Addr, now: SimTime) -> Vec<IkeAction> {
        if self.state != IkeState::Established {
            self.queued_handover = Some((new_ip, now));
            return Vec::new();
        }
        self.current_ip = new_ip;
        self.handover_started = Some(now);
        self.start_exchange(IkeMsgKind::UpdateReq, IkeState::UpdateSent, now)
    }

    pub fn on_message(&mut self, msg: &IkeMessage, now: SimTime) -> Vec<IkeAction> {
        let Some(in_flight) = self.in_flight else {
            return Vec::new();
        };
        if in_flight.kind.response() != Some(msg.kind) || in_flight.msg_id != msg.msg_id {
            return Vec::new();
        }
        self.in_flight = None;
        self.timer_generation += 1;
        self.retry_count = 0;
        self.rto = SimTime::from_millis_f64(self.config.rto_initial_ms);
        match self.state {
            IkeState::InitSent => self.start_exchange(IkeMsgKind::AuthReq, IkeState::AuthSent, now),
            IkeState::AuthSent => {
                self.state = IkeState::Established;
                self.established_at = Some(now);
                self.sa_generation += 1;
                self.ah_seq = 0;
                let mut out = vec![IkeAction::Established { at: now }];
                if let Some((ip, _)) = self.queued_handover.take() {
                    out.extend(self.mobike_handover(ip, now));
                }
                out
            }
            IkeState::UpdateSent => self.start_exchange(IkeMsgKind::RekeyReq, IkeState::RekeySent, now),
            IkeState::RekeySent => {
                self.state = IkeState::Established;
                self.sa_generation += 1;
                self.ah_seq = 0;
                let started = self.handover_started.take().unwrap_or(now);
                vec![IkeAction::HandoverComplete { at: now, latency: now.saturating_sub(started) }]
            }
            IkeState::Idle | IkeState::Established => Vec::new(),
        }
    }

    /// Stale generations (timers cancelled by a response) are ignored.
    pub fn on_timeout(&mut self, generation: u64, now: SimTime) -> Vec<IkeAction> {
        if generation != self.timer_generation {
            return Vec::new();
        }
        let Some(msg) = self.in_flight else {
            return Vec::new();
        };
        if self.retry_count >= self.config.max_retries {
            let during = self.state;
            self.state = IkeState::Idle;
            self.in_flight = None;
            self.retry_count = 0;
            self.handover_started = None;
            self.rto = SimTime::from_millis_f64(self.config.rto_initial_ms);
            self.timer_generation += 1;
            return vec![IkeAction::Failed { at: now, during }];
        }
        self.retry_count += 1;
        self.rto = SimTime::from_millis_f64(self.rto.as_millis_f64() * self.config.rto_backoff);
        self.timer_generation += 1;
        vec![IkeAction::Send(msg), IkeAction::ArmTimer { at: now + self.rto, generation: self.timer_generation }]
    }

    fn start_exchange(&mut self, kind: IkeMsgKind, next: IkeState, now: SimTime) -> Vec<IkeAction> {
        let msg = IkeMessage { kind, msg_id: self.next_msg_id, size_bytes: self.config.size_of(kind) };
        self.next_msg_id += 1;
        self.state = next;
        self.in_flight = Some(msg);
        self.retry_count = 0;
        self.rto = SimTime::from_millis_f64(self.config.rto_initial_ms);
        self.timer_generation += 1;
        vec![IkeAction::Send(msg), IkeAction::ArmTimer { at: now + self.rto, generation: self.timer_generation }]
    }

    /// Protects one outbound data packet with the current child SA.
    pub fn protect(&mut self, ip: &ImmutableIpFields, payload: &[u8]) -> Result<AhPacket, IkeError> {
        if !self.can_send_data() {
            return Err(IkeError::WrongState(self.state));
        }
        self.ah_seq = self.ah_seq.wrapping_add(1);
        Ok(ah_protect(&sa_key(self.sa_generation), SPI, self.ah_seq, ip, payload))
    }

    pub fn sa_generation(&self) -> u32 {
        self.sa_generation
    }
}

/// Responder side (the HA). Answers every well-formed request; replays of an
/// already answered `msg_id` get the same answer again.
#[derive(Debug, Clone, Default)]
pub struct IkeResponder {
    config: IkeConfig,
    last_answered: Option<(u32, IkeMsgKind)>,
    sa_generation: u32,
    responses_sent: u64,
}

impl IkeResponder {
    pub fn new(config: IkeConfig) -> Self {
        IkeResponder { config, ..Default::default() }
    }

    pub fn on_message(&mut self, msg: &IkeMessage) -> Option<IkeMessage> {
        let resp_kind = msg.kind.response()?;
        let fresh = self.last_answered.is_none_or(|(id, _)| msg.msg_id > id);
        let replay = self.last_answered == Some((msg.msg_id, msg.kind));
        if !fresh && !replay {
            return None;
        }
        if fresh && matches!(msg.kind, IkeMsgKind::AuthReq | IkeMsgKind::RekeyReq) {
            self.sa_generation += 1;
        }
        self.last_answered = Some((msg.msg_id, msg.kind));
        self.responses_sent += 1;
        Some(IkeMessage { kind: resp_kind, msg_id: msg.msg_id, size_bytes: self.config.size_of(resp_kind) })
    }

    pub fn responses_sent(&self) -> u64 {
        self.responses_sent
    }

    pub fn verify(&self, pkt: &AhPacket, ip: &ImmutableIpFields) -> bool {
        ah_verify(&sa_key(self.sa_generation), ip, pkt)
    }
}

const SPI: u32 = 0x0000_1001;

/// Stand-in child-SA key; both ends derive it from the SA generation counter.
fn sa_key(generation: u32) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ike-baseline child sa");
    h.update(generation.to_be_bytes());
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AhPacket {
    pub spi: u32,
    pub seq: u32,
    pub icv: [u8; AH_ICV_LEN],
    pub payload: Vec<u8>,
}

impl AhPacket {
    /// AH header plus payload, without the outer IP header.
    pub fn wire_len(&self) -> usize {
        AH_OVERHEAD_BYTES + self.payload.len()
    }
}

fn icv_mac(key: &[u8; 32], spi: u32, seq: u32, ip: &ImmutableIpFields, payload: &[u8]) -> HmacSha256 {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(&ip.to_bytes());
    mac.update(&spi.to_be_bytes());
    mac.update(&seq.to_be_bytes());
    mac.update(payload);
    mac
}

pub fn ah_protect(key: &[u8; 32], spi: u32, seq: u32, ip: &ImmutableIpFields, payload: &[u8]) -> AhPacket {
    let icv = icv_mac(key, spi, seq, ip, payload).finalize().into_bytes().into();
    AhPacket { spi, seq, icv, payload: payload.to_vec() }
}

pub fn ah_verify(key: &[u8; 32], ip: &ImmutableIpFields, pkt: &AhPacket) -> bool {
    icv_mac(key, pkt.spi, pkt.seq, ip, &pkt.payload).verify_slice(&pkt.icv).is_ok()
}
