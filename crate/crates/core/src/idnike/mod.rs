//! Identity-based non-interactive key derivation.
//!
//! A router's master secret `s` acts as its own private key generator:
//!
//! * HA registration voucher: `S_HA = s * H2(ID_HA || IP_HA)`
//! * per-adapter private point: `S_IF = s * H1(ID_MR || IP_IF || IF)`
//! * router side shared material: `K = e(S_IF, H2(ID_HA || IP_HA))`
//! * HA side shared material: `K = e(H1(ID_MR || IP_IF || IF), S_HA)`
//!
//! Both sides obtain `e(H1, H2)^s` without exchanging a message. The session
//! key is `HKDF-SHA256(salt = "NIMSA-v1", ikm = K, info = tag || seed)`.

pub mod codec;
mod suite;

use std::fmt;

use ark_bls12_381::{Fr, G1Affine, G2Affine};
use ark_ec::CurveGroup;
use ark_ff::Zero;
use hkdf::Hkdf;
use rand::RngCore;
use sha2::Sha256;
use thiserror::Error;

pub use ark_bls12_381::Fr as Scalar;
pub use suite::{Gt, PairingSuite, SecurityLevel, SUITE_BYTES};

/// Domain-separation tag mixed into the session-key PRF.
pub const PRF_TAG: &[u8] = b"NIMSA-v1";
const PRF_INFO_PREFIX: &[u8] = b"NIMSA-v1 session key";

pub const SESSION_KEY_BYTES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdnikeError {
    #[error("unsupported security profile `{0}`")]
    UnsupportedProfile(String),
    #[error("device identifier must not be empty")]
    EmptyDeviceId,
    #[error("label field of {0} bytes exceeds 65535")]
    FieldTooLong(usize),
    #[error("master secret must be non-zero")]
    ZeroMaster,
    #[error("session key seed must be >= 1")]
    ZeroSeed,
    #[error("private point and peer identity are on the same side of the pairing")]
    SideMismatch,
    #[error("malformed encoding: {0}")]
    Decode(&'static str),
}

/// Which pairing argument an identity hashes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Router adapter identities, G1.
    Router,
    /// Home agent identities, G2.
    HomeAgent,
}

/// Router master secret `s`, uniform in `[1, q-1]`.
///
/// Deliberately has no serializer; `Debug` is redacted.
#[derive(Clone, PartialEq, Eq)]
pub struct MasterSecret(Fr);

impl fmt::Debug for MasterSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterSecret(..)")
    }
}

impl MasterSecret {
    pub fn from_scalar(s: Fr) -> Result<Self, IdnikeError> {
        if s.is_zero() {
            Err(IdnikeError::ZeroMaster)
        } else {
            Ok(MasterSecret(s))
        }
    }

    pub fn from_u64(s: u64) -> Result<Self, IdnikeError> {
        Self::from_scalar(Fr::from(s))
    }

    /// Draws from `sample` until it yields a non-zero scalar.
    pub fn sample_with(mut sample: impl FnMut() -> Fr) -> Self {
        loop {
            let s = sample();
            if !s.is_zero() {
                return MasterSecret(s);
            }
        }
    }

    pub fn scalar(&self) -> &Fr {
        &self.0
    }
}

/// `setup` under its operation name.
pub fn setup(level: SecurityLevel, deterministic_seed: Option<u64>) -> PairingSuite {
    PairingSuite::setup(level, deterministic_seed)
}

pub fn gen_master<R: RngCore + ?Sized>(_suite: &PairingSuite, rng: &mut R) -> MasterSecret {
    MasterSecret::sample_with(|| <Fr as ark_ff::UniformRand>::rand(rng))
}

/// `len(id) || id || len(ip) || ip [|| 0x01 || if_num]`, lengths u16 big-endian.
pub fn encode_label(device_id: &[u8], ip: &[u8], if_num: Option<u8>) -> Result<Vec<u8>, IdnikeError> {
    if device_id.is_empty() {
        return Err(IdnikeError::EmptyDeviceId);
    }
    let mut out = Vec::with_capacity(4 + device_id.len() + ip.len() + 2);
    for field in [device_id, ip] {
        let len = u16::try_from(field.len()).map_err(|_| IdnikeError::FieldTooLong(field.len()))?;
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(field);
    }
    if let Some(n) = if_num {
        out.push(0x01);
        out.push(n);
    }
    Ok(out)
}

/// `(device id, address, optional adapter index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdentityLabel {
    pub device_id: Vec<u8>,
    pub ip: Vec<u8>,
    pub if_num: Option<u8>,
}

impl IdentityLabel {
    /// Label of one router adapter: `ID_MR || IP_MR^IF || IF`.
    pub fn interface(device_id: impl Into<Vec<u8>>, ip: impl Into<Vec<u8>>, if_num: u8) -> Self {
        IdentityLabel { device_id: device_id.into(), ip: ip.into(), if_num: Some(if_num) }
    }

    /// Label of the home agent: `ID_HA || IP_HA`.
    pub fn home_agent(device_id: impl Into<Vec<u8>>, ip: impl Into<Vec<u8>>) -> Self {
        IdentityLabel { device_id: device_id.into(), ip: ip.into(), if_num: None }
    }

    pub fn side(&self) -> Side {
        if self.if_num.is_some() {
            Side::Router
        } else {
            Side::HomeAgent
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, IdnikeError> {
        encode_label(&self.device_id, &self.ip, self.if_num)
    }
}

/// `H(label)`, in G1 for router labels and G2 for home-agent labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashedIdentity {
    Router(G1Affine),
    HomeAgent(G2Affine),
}

impl HashedIdentity {
    pub fn of(suite: &PairingSuite, label: &IdentityLabel) -> Result<Self, IdnikeError> {
        let msg = label.encode()?;
        Ok(match label.side() {
            Side::Router => HashedIdentity::Router(suite.hash_to_g1(&msg)),
            Side::HomeAgent => HashedIdentity::HomeAgent(suite.hash_to_g2(&msg)),
        })
    }

    pub fn side(&self) -> Side {
        match self {
            HashedIdentity::Router(_) => Side::Router,
            HashedIdentity::HomeAgent(_) => Side::HomeAgent,
        }
    }

    fn scaled(&self, s: &Fr) -> PrivatePoint {
        match self {
            HashedIdentity::Router(p) => PrivatePoint::Router((*p * s).into_affine()),
            HashedIdentity::HomeAgent(p) => PrivatePoint::HomeAgent((*p * s).into_affine()),
        }
    }
}

/// `s * H(label)`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PrivatePoint {
    Router(G1Affine),
    HomeAgent(G2Affine),
}

impl fmt::Debug for PrivatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivatePoint::Router(_) => f.write_str("PrivatePoint::Router(..)"),
            PrivatePoint::HomeAgent(_) => f.write_str("PrivatePoint::HomeAgent(..)"),
        }
    }
}

impl PrivatePoint {
    pub fn side(&self) -> Side {
        match self {
            PrivatePoint::Router(_) => Side::Router,
            PrivatePoint::HomeAgent(_) => Side::HomeAgent,
        }
    }

    /// Side tag (`0x01` router / `0x02` home agent) followed by the compressed point.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            PrivatePoint::Router(p) => [&[0x01][..], &codec::g1_to_bytes(p)].concat(),
            PrivatePoint::HomeAgent(p) => [&[0x02][..], &codec::g2_to_bytes(p)].concat(),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdnikeError> {
        match bytes.split_first() {
            Some((0x01, rest)) => Ok(PrivatePoint::Router(codec::g1_from_bytes(rest)?)),
            Some((0x02, rest)) => Ok(PrivatePoint::HomeAgent(codec::g2_from_bytes(rest)?)),
            _ => Err(IdnikeError::Decode("private point tag")),
        }
    }
}

pub fn derive_private_point(
    suite: &PairingSuite,
    master: &MasterSecret,
    label: &IdentityLabel,
) -> Result<PrivatePoint, IdnikeError> {
    Ok(HashedIdentity::of(suite, label)?.scaled(&master.0))
}

/// Same as [`derive_private_point`] for an already hashed identity.
pub fn private_point_from_hash(master: &MasterSecret, hashed: &HashedIdentity) -> PrivatePoint {
    hashed.scaled(&master.0)
}

/// Pairing output shared by the router adapter and the home agent.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SharedMaterial(Gt);

impl fmt::Debug for SharedMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SharedMaterial(..)")
    }
}

impl SharedMaterial {
    pub fn from_gt(k: Gt) -> Self {
        SharedMaterial(k)
    }

    pub fn gt(&self) -> &Gt {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; codec::GT_BYTES] {
        codec::gt_to_bytes(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdnikeError> {
        codec::gt_from_bytes(bytes).map(SharedMaterial)
    }
}

pub fn shared_from_private(
    suite: &PairingSuite,
    own_private: &PrivatePoint,
    peer_label: &IdentityLabel,
) -> Result<SharedMaterial, IdnikeError> {
    let peer = HashedIdentity::of(suite, peer_label)?;
    shared_from_hashed(suite, own_private, &peer)
}

/// Pairs a private point with the opposite side's hashed identity.
pub fn shared_from_hashed(
    suite: &PairingSuite,
    own_private: &PrivatePoint,
    peer: &HashedIdentity,
) -> Result<SharedMaterial, IdnikeError> {
    match (own_private, peer) {
        (PrivatePoint::Router(s_if), HashedIdentity::HomeAgent(h_ha)) => Ok(SharedMaterial(suite.pairing(s_if, h_ha))),
        (PrivatePoint::HomeAgent(s_ha), HashedIdentity::Router(h_mr)) => Ok(SharedMaterial(suite.pairing(h_mr, s_ha))),
        _ => Err(IdnikeError::SideMismatch),
    }
}

/// 32-byte symmetric key tied to the seed it was derived under.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey {
    key: [u8; SESSION_KEY_BYTES],
    seed: u32,
}

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionKey").field("seed", &self.seed).finish_non_exhaustive()
    }
}

impl SessionKey {
    pub fn from_bytes(key: [u8; SESSION_KEY_BYTES], seed: u32) -> Self {
        SessionKey { key, seed }
    }

    pub fn key_bytes(&self) -> &[u8; SESSION_KEY_BYTES] {
        &self.key
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }
}

pub fn derive_session_key(material: &SharedMaterial, seed: u32) -> Result<SessionKey, IdnikeError> {
    prf_session_key(&material.to_bytes(), seed)
}

/// The session-key PRF on raw input keying material.
pub fn prf_session_key(ikm: &[u8], seed: u32) -> Result<SessionKey, IdnikeError> {
    if seed == 0 {
        return Err(IdnikeError::ZeroSeed);
    }
    let hk = Hkdf::<Sha256>::new(Some(PRF_TAG), ikm);
    let mut info = Vec::with_capacity(PRF_INFO_PREFIX.len() + 4);
    info.extend_from_slice(PRF_INFO_PREFIX);
    info.extend_from_slice(&seed.to_be_bytes());
    let mut key = [0u8; SESSION_KEY_BYTES];
    hk.expand(&info, &mut key).expect("32 bytes is a valid HKDF-SHA256 output length");
    Ok(SessionKey { key, seed })
}

#[cfg(test)]
mod tests;
