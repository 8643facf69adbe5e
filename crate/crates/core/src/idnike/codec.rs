//! Canonical fixed-length encodings.
//!
//! | kind   | bytes | layout                                                    |
//! |--------|-------|-----------------------------------------------------------|
//! | scalar | 32    | big-endian integer, must be `< q`                         |
//! | G1     | 48    | compressed, ZCash flag bits (same as the IETF BLS drafts) |
//! | G2     | 96    | compressed, ZCash flag bits                               |
//! | GT     | 576   | 12 base-field coefficients, each 48 bytes little-endian,  |
//! |        |       | tower order `c0.c0.c0, c0.c0.c1, c0.c1.c0, ... c1.c2.c1`  |
//!
//! Decoding validates curve membership and subgroup membership.

use ark_bls12_381::{Fr, G1Affine, G2Affine};
use ark_ff::{BigInteger, PrimeField};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use super::suite::Gt;
use super::IdnikeError;

pub const SCALAR_BYTES: usize = 32;
pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;
pub const GT_BYTES: usize = 576;

pub fn scalar_to_bytes(s: &Fr) -> [u8; SCALAR_BYTES] {
    let mut out = [0u8; SCALAR_BYTES];
    out.copy_from_slice(&s.into_bigint().to_bytes_be());
    out
}

pub fn scalar_from_bytes(bytes: &[u8]) -> Result<Fr, IdnikeError> {
    if bytes.len() != SCALAR_BYTES {
        return Err(IdnikeError::Decode("scalar length"));
    }
    let mut le = [0u8; SCALAR_BYTES];
    le.copy_from_slice(bytes);
    le.reverse();
    let repr =
        <Fr as PrimeField>::BigInt::deserialize_uncompressed(&le[..]).map_err(|_| IdnikeError::Decode("scalar"))?;
    Fr::from_bigint(repr).ok_or(IdnikeError::Decode("scalar out of range"))
}

fn write<T: CanonicalSerialize, const N: usize>(v: &T) -> [u8; N] {
    let mut out = [0u8; N];
    v.serialize_compressed(&mut out[..]).expect("fixed-size buffer matches compressed size");
    out
}

fn read<T: CanonicalDeserialize>(bytes: &[u8], len: usize, what: &'static str) -> Result<T, IdnikeError> {
    if bytes.len() != len {
        return Err(IdnikeError::Decode(what));
    }
    T::deserialize_compressed(bytes).map_err(|_| IdnikeError::Decode(what))
}

pub fn g1_to_bytes(p: &G1Affine) -> [u8; G1_BYTES] {
    write(p)
}

pub fn g1_from_bytes(bytes: &[u8]) -> Result<G1Affine, IdnikeError> {
    read(bytes, G1_BYTES, "G1 point")
}

pub fn g2_to_bytes(p: &G2Affine) -> [u8; G2_BYTES] {
    write(p)
}

pub fn g2_from_bytes(bytes: &[u8]) -> Result<G2Affine, IdnikeError> {
    read(bytes, G2_BYTES, "G2 point")
}

pub fn gt_to_bytes(x: &Gt) -> [u8; GT_BYTES] {
    write(x)
}

pub fn gt_from_bytes(bytes: &[u8]) -> Result<Gt, IdnikeError> {
    read(bytes, GT_BYTES, "GT element")
}
