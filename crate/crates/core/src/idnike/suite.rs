use std::fmt;
use std::str::FromStr;

use ark_bls12_381::{g1, g2, Bls12_381, Fq, Fq2, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256, Sha384};

use super::codec;
use super::IdnikeError;

/// Target group element.
pub type Gt = PairingOutput<Bls12_381>;

const DST_G1: &[u8] = b"NIMSA-v1-MR_BLS12381G1_XMD:SHA-256_SSWU_RO_";
const DST_G2: &[u8] = b"NIMSA-v1-HA_BLS12381G2_XMD:SHA-256_SSWU_RO_";
const TAI_TAG_G1: &[u8] = b"NIMSA-v1-TAI-G1";
const TAI_TAG_G2: &[u8] = b"NIMSA-v1-TAI-G2";

/// Curve profile.
///
/// Both profiles run on BLS12-381. `Standard` hashes identities with the
/// SSWU (`_RO_`) hash-to-curve suites; `Test` uses try-and-increment, which
/// is not constant time and must not be used outside tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityLevel {
    Test,
    Standard,
}

impl SecurityLevel {
    fn tag(self) -> u8 {
        match self {
            SecurityLevel::Test => 0x01,
            SecurityLevel::Standard => 0x02,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0x01 => Some(SecurityLevel::Test),
            0x02 => Some(SecurityLevel::Standard),
            _ => None,
        }
    }
}

impl FromStr for SecurityLevel {
    type Err = IdnikeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "test" => Ok(SecurityLevel::Test),
            "standard" => Ok(SecurityLevel::Standard),
            other => Err(IdnikeError::UnsupportedProfile(other.to_string())),
        }
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecurityLevel::Test => "test",
            SecurityLevel::Standard => "standard",
        })
    }
}

/// Public parameters of the bilinear group system.
///
/// The pairing is the optimal ate pairing `e: G1 x G2 -> GT`. Router-side
/// identities (those carrying an adapter index) hash into G1 and home-agent
/// identities hash into G2, so the two sides of the key agreement always
/// land in the argument slot the pairing expects.
#[derive(Clone, PartialEq, Eq)]
pub struct PairingSuite {
    level: SecurityLevel,
    g1: G1Affine,
    g2: G2Affine,
}

impl fmt::Debug for PairingSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairingSuite")
            .field("level", &self.level)
            .field("g1", &hex(&codec::g1_to_bytes(&self.g1)[..8]))
            .finish_non_exhaustive()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Length of [`PairingSuite::to_bytes`].
pub const SUITE_BYTES: usize = 1 + codec::G1_BYTES + codec::G2_BYTES;

impl PairingSuite {
    /// Generates a bilinear group system for the given profile.
    ///
    /// The generator pair is `(r*P1, r*P2)` for a random non-zero `r`; a
    /// fixed `deterministic_seed` makes the parameters reproducible.
    pub fn setup(level: SecurityLevel, deterministic_seed: Option<u64>) -> Self {
        let r = match deterministic_seed {
            Some(seed) => nonzero_scalar(&mut ChaCha20Rng::seed_from_u64(seed)),
            None => nonzero_scalar(&mut rand::rngs::OsRng),
        };
        let g1 = (G1Affine::generator() * r).into_affine();
        let g2 = (G2Affine::generator() * r).into_affine();
        PairingSuite { level, g1, g2 }
    }

    pub fn level(&self) -> SecurityLevel {
        self.level
    }

    pub fn generator_g1(&self) -> G1Affine {
        self.g1
    }

    pub fn generator_g2(&self) -> G2Affine {
        self.g2
    }

    /// Prime order `q` shared by G1, G2 and GT.
    pub fn group_order(&self) -> BigUint {
        BigUint::from_bytes_le(&Fr::MODULUS.to_bytes_le())
    }

    pub fn pairing(&self, p: &G1Affine, q: &G2Affine) -> Gt {
        Bls12_381::pairing(*p, *q)
    }

    pub fn hash_to_g1(&self, msg: &[u8]) -> G1Affine {
        match self.level {
            SecurityLevel::Standard => {
                MapToCurveBasedHasher::<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>::new(DST_G1)
                    .and_then(|h| h.hash(msg))
                    .expect("SSWU hasher for G1 is infallible with a valid DST")
            }
            SecurityLevel::Test => try_and_increment_g1(msg),
        }
    }

    pub fn hash_to_g2(&self, msg: &[u8]) -> G2Affine {
        match self.level {
            SecurityLevel::Standard => {
                MapToCurveBasedHasher::<G2Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g2::Config>>::new(DST_G2)
                    .and_then(|h| h.hash(msg))
                    .expect("SSWU hasher for G2 is infallible with a valid DST")
            }
            SecurityLevel::Test => try_and_increment_g2(msg),
        }
    }

    /// `profile tag (1) || g1 (48) || g2 (96)`.
    pub fn to_bytes(&self) -> [u8; SUITE_BYTES] {
        let mut out = [0u8; SUITE_BYTES];
        out[0] = self.level.tag();
        out[1..1 + codec::G1_BYTES].copy_from_slice(&codec::g1_to_bytes(&self.g1));
        out[1 + codec::G1_BYTES..].copy_from_slice(&codec::g2_to_bytes(&self.g2));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IdnikeError> {
        if bytes.len() != SUITE_BYTES {
            return Err(IdnikeError::Decode("suite length"));
        }
        let level = SecurityLevel::from_tag(bytes[0])
            .ok_or_else(|| IdnikeError::UnsupportedProfile(format!("tag {:#04x}", bytes[0])))?;
        let g1 = codec::g1_from_bytes(&bytes[1..1 + codec::G1_BYTES])?;
        let g2 = codec::g2_from_bytes(&bytes[1 + codec::G1_BYTES..])?;
        if g1.is_zero() || g2.is_zero() {
            return Err(IdnikeError::Decode("identity generator"));
        }
        Ok(PairingSuite { level, g1, g2 })
    }
}

pub(crate) fn nonzero_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Fr {
    loop {
        let s = Fr::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

fn tai_field_element(tag: &[u8], ctr: u32, lane: u8, msg: &[u8]) -> ([u8; 48], Fq) {
    let digest: [u8; 48] = Sha384::new()
        .chain_update(tag)
        .chain_update(ctr.to_be_bytes())
        .chain_update([lane])
        .chain_update(msg)
        .finalize()
        .into();
    (digest, Fq::from_be_bytes_mod_order(&digest))
}

fn try_and_increment_g1(msg: &[u8]) -> G1Affine {
    for ctr in 0u32.. {
        let (digest, x) = tai_field_element(TAI_TAG_G1, ctr, 0, msg);
        let greatest = digest[47] & 1 == 1;
        if let Some(p) = G1Affine::get_point_from_x_unchecked(x, greatest) {
            let p = p.clear_cofactor();
            if !p.is_zero() {
                return p;
            }
        }
    }
    unreachable!("try-and-increment exhausted the counter space")
}

fn try_and_increment_g2(msg: &[u8]) -> G2Affine {
    for ctr in 0u32.. {
        let (digest, c0) = tai_field_element(TAI_TAG_G2, ctr, 0, msg);
        let (_, c1) = tai_field_element(TAI_TAG_G2, ctr, 1, msg);
        let greatest = digest[47] & 1 == 1;
        if let Some(p) = G2Affine::get_point_from_x_unchecked(Fq2::new(c0, c1), greatest) {
            let p = p.clear_cofactor();
            if !p.is_zero() {
                return p;
            }
        }
    }
    unreachable!("try-and-increment exhausted the counter space")
}
