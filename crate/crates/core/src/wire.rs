//! NIMSA authentication header and packet envelope.
//!
//! Header layout (47 bytes, big-endian):
//!
//! ```text
//!  0        1                9        10               14       15                        47
//! +--------+----------------+--------+----------------+--------+-------------------------+
//! |version |     mr_id      |if_num  |      seed      | flags  |        auth_tag         |
//! |  0x01  |   8 bytes      | 1 byte |    4 bytes     | 1 byte |        32 bytes         |
//! +--------+----------------+--------+----------------+--------+-------------------------+
//! ```
//!
//! `flags` bit 0 marks a notification-mode address update; the other bits are
//! reserved and must be zero. The tag is
//! `HMAC-SHA256(k, src_ip || dst_ip || payload_length || header[0..15] || payload)`.
//! The TTL byte of the envelope is mutable in transit and is not covered.

use std::net::Ipv4Addr;

use hmac::{Hmac, Mac};
use sha2::Sha256;
use thiserror::Error;

use crate::idnike::SessionKey;

pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 47;
pub const HEADER_PREFIX_LEN: usize = 15;
pub const TAG_LEN: usize = 32;
pub const FLAG_NOTIFICATION: u8 = 0x01;
const RESERVED_FLAGS: u8 = !FLAG_NOTIFICATION;

/// Bytes of the simulated envelope ahead of the NIMSA header:
/// `src (4) || dst (4) || ttl (1) || payload_length (2)`.
pub const ENVELOPE_LEN: usize = 11;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("reserved flag bits set: {0:#04x}")]
    ReservedFlags(u8),
    #[error("unsupported header version {0}")]
    Version(u8),
    #[error("truncated input: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("payload length field {declared} does not match payload of {actual} bytes")]
    LengthMismatch { declared: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NimsaHeader {
    pub version: u8,
    pub mr_id: u64,
    pub if_num: u8,
    pub seed: u32,
    pub flags: u8,
    pub auth_tag: [u8; TAG_LEN],
}

impl NimsaHeader {
    /// Header with a zero tag, ready to be authenticated.
    pub fn new(mr_id: u64, if_num: u8, seed: u32, flags: u8) -> Self {
        NimsaHeader { version: VERSION, mr_id, if_num, seed, flags, auth_tag: [0; TAG_LEN] }
    }

    pub fn is_notification(&self) -> bool {
        self.flags & FLAG_NOTIFICATION != 0
    }

    fn check(&self) -> Result<(), WireError> {
        if self.version != VERSION {
            return Err(WireError::Version(self.version));
        }
        if self.flags & RESERVED_FLAGS != 0 {
            return Err(WireError::ReservedFlags(self.flags));
        }
        Ok(())
    }

    /// Everything ahead of the tag.
    pub fn prefix(&self) -> Result<[u8; HEADER_PREFIX_LEN], WireError> {
        self.check()?;
        let mut out = [0u8; HEADER_PREFIX_LEN];
        out[0] = self.version;
        out[1..9].copy_from_slice(&self.mr_id.to_be_bytes());
        out[9] = self.if_num;
        out[10..14].copy_from_slice(&self.seed.to_be_bytes());
        out[14] = self.flags;
        Ok(out)
    }
}

pub fn encode_header(h: &NimsaHeader) -> Result<[u8; HEADER_LEN], WireError> {
    let mut out = [0u8; HEADER_LEN];
    out[..HEADER_PREFIX_LEN].copy_from_slice(&h.prefix()?);
    out[HEADER_PREFIX_LEN..].copy_from_slice(&h.auth_tag);
    Ok(out)
}

/// Decodes the first [`HEADER_LEN`] bytes of `bytes`.
pub fn decode_header(bytes: &[u8]) -> Result<NimsaHeader, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::Truncated { need: HEADER_LEN, have: bytes.len() });
    }
    let h = NimsaHeader {
        version: bytes[0],
        mr_id: u64::from_be_bytes(bytes[1..9].try_into().unwrap()),
        if_num: bytes[9],
        seed: u32::from_be_bytes(bytes[10..14].try_into().unwrap()),
        flags: bytes[14],
        auth_tag: bytes[HEADER_PREFIX_LEN..HEADER_LEN].try_into().unwrap(),
    };
    h.check()?;
    Ok(h)
}

/// IP fields a router never rewrites in transit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImmutableIpFields {
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub payload_length: u16,
}

impl ImmutableIpFields {
    pub fn to_bytes(&self) -> [u8; 10] {
        let mut out = [0u8; 10];
        out[..4].copy_from_slice(&self.src_ip.octets());
        out[4..8].copy_from_slice(&self.dst_ip.octets());
        out[8..].copy_from_slice(&self.payload_length.to_be_bytes());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NimsaPacket {
    pub ip: ImmutableIpFields,
    /// Hop limit; routers decrement it, so it is excluded from the tag.
    pub ttl: u8,
    pub header: NimsaHeader,
    pub payload: Vec<u8>,
}

pub const DEFAULT_TTL: u8 = 64;

impl NimsaPacket {
    /// Builds a packet and fills in its tag under `key`.
    pub fn seal(
        key: &SessionKey,
        src_ip: Ipv4Addr,
        dst_ip: Ipv4Addr,
        mut header: NimsaHeader,
        payload: Vec<u8>,
    ) -> Result<Self, WireError> {
        let payload_length = u16::try_from(payload.len())
            .map_err(|_| WireError::LengthMismatch { declared: u16::MAX as usize, actual: payload.len() })?;
        let ip = ImmutableIpFields { src_ip, dst_ip, payload_length };
        header.auth_tag = compute_auth_tag(key, &ip, &header.prefix()?, &payload);
        Ok(NimsaPacket { ip, ttl: DEFAULT_TTL, header, payload })
    }

    /// Envelope + header + payload, as put on the simulated wire.
    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        if usize::from(self.ip.payload_length) != self.payload.len() {
            return Err(WireError::LengthMismatch {
                declared: self.ip.payload_length.into(),
                actual: self.payload.len(),
            });
        }
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&self.ip.src_ip.octets());
        out.extend_from_slice(&self.ip.dst_ip.octets());
        out.push(self.ttl);
        out.extend_from_slice(&self.ip.payload_length.to_be_bytes());
        out.extend_from_slice(&encode_header(&self.header)?);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let need = ENVELOPE_LEN + HEADER_LEN;
        if bytes.len() < need {
            return Err(WireError::Truncated { need, have: bytes.len() });
        }
        let src_ip = Ipv4Addr::new(bytes[0], bytes[1], bytes[2], bytes[3]);
        let dst_ip = Ipv4Addr::new(bytes[4], bytes[5], bytes[6], bytes[7]);
        let ttl = bytes[8];
        let payload_length = u16::from_be_bytes([bytes[9], bytes[10]]);
        let header = decode_header(&bytes[ENVELOPE_LEN..])?;
        let payload = bytes[need..].to_vec();
        if payload.len() != usize::from(payload_length) {
            return Err(WireError::LengthMismatch { declared: payload_length.into(), actual: payload.len() });
        }
        Ok(NimsaPacket { ip: ImmutableIpFields { src_ip, dst_ip, payload_length }, ttl, header, payload })
    }

    pub fn wire_len(&self) -> usize {
        ENVELOPE_LEN + HEADER_LEN + self.payload.len()
    }
}

pub fn compute_auth_tag(
    key: &SessionKey,
    ip: &ImmutableIpFields,
    header_sans_tag: &[u8; HEADER_PREFIX_LEN],
    payload: &[u8],
) -> [u8; TAG_LEN] {
    tag_mac(key, ip, header_sans_tag, payload).finalize().into_bytes().into()
}

fn tag_mac(key: &SessionKey, ip: &ImmutableIpFields, prefix: &[u8], payload: &[u8]) -> HmacSha256 {
    let mut mac = HmacSha256::new_from_slice(key.key_bytes()).expect("HMAC accepts any key length");
    mac.update(&ip.to_bytes());
    mac.update(prefix);
    mac.update(payload);
    mac
}

/// Constant-time tag check. Never fails loudly: malformed packets verify as false.
pub fn verify_packet(key: &SessionKey, pkt: &NimsaPacket) -> bool {
    if usize::from(pkt.ip.payload_length) != pkt.payload.len() {
        return false;
    }
    let Ok(prefix) = pkt.header.prefix() else {
        return false;
    };
    tag_mac(key, &pkt.ip, &prefix, &pkt.payload).verify_slice(&pkt.header.auth_tag).is_ok()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn key(seed: u32) -> SessionKey {
        SessionKey::from_bytes([0x0b; 32], seed)
    }

    fn ip(len: u16) -> ImmutableIpFields {
        ImmutableIpFields {
            src_ip: Ipv4Addr::new(10, 0, 0, 2),
            dst_ip: Ipv4Addr::new(192, 0, 2, 1),
            payload_length: len,
        }
    }

    #[test]
    fn header_layout() {
        let h = NimsaHeader::new(1, 0, 1, 0);
        let mut expected = vec![0x01, 0, 0, 0, 0, 0, 0, 0, 1, 0x00, 0, 0, 0, 1, 0x00];
        expected.extend_from_slice(&[0u8; 32]);
        assert_eq!(encode_header(&h).unwrap().to_vec(), expected);
    }

    #[test]
    fn reserved_flags_rejected() {
        let h = NimsaHeader::new(1, 0, 1, 0x02);
        assert_eq!(encode_header(&h), Err(WireError::ReservedFlags(0x02)));
        let mut bytes = encode_header(&NimsaHeader::new(1, 0, 1, 0)).unwrap();
        bytes[14] = 0x80;
        assert_eq!(decode_header(&bytes), Err(WireError::ReservedFlags(0x80)));
        bytes[14] = 0;
        bytes[0] = 2;
        assert_eq!(decode_header(&bytes), Err(WireError::Version(2)));
        assert!(matches!(decode_header(&bytes[..46]), Err(WireError::Truncated { .. })));
    }

    #[test]
    fn header_round_trip_fuzz() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let h = NimsaHeader {
                version: VERSION,
                mr_id: r.gen(),
                if_num: r.gen(),
                seed: r.gen(),
                flags: r.gen::<u8>() & FLAG_NOTIFICATION,
                auth_tag: r.gen(),
            };
            assert_eq!(decode_header(&encode_header(&h).unwrap()).unwrap(), h);
        }
    }

    #[test]
    fn tag_is_deterministic_and_payload_sensitive() {
        let prefix = NimsaHeader::new(7, 1, 3, 0).prefix().unwrap();
        let a = compute_auth_tag(&key(3), &ip(4), &prefix, b"data");
        assert_eq!(a, compute_auth_tag(&key(3), &ip(4), &prefix, b"data"));
        assert_ne!(a, compute_auth_tag(&key(3), &ip(4), &prefix, b"datb"));
    }

    #[test]
    fn tag_matches_reference_hmac() {
        let fields =
            ImmutableIpFields { src_ip: Ipv4Addr::UNSPECIFIED, dst_ip: Ipv4Addr::UNSPECIFIED, payload_length: 0 };
        let prefix = NimsaHeader::new(0, 0, 1, 0).prefix().unwrap();
        let tag = compute_auth_tag(&key(1), &fields, &prefix, &[]);
        // Reference: HMAC-SHA256 over the concatenated message, computed in one shot.
        let mut msg = vec![0u8; 10];
        msg.extend_from_slice(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0]);
        let mut reference = HmacSha256::new_from_slice(&[0x0b; 32]).unwrap();
        reference.update(&msg);
        assert_eq!(tag.to_vec(), reference.finalize().into_bytes().to_vec());
    }

    #[test]
    fn verify_accepts_sealed_and_rejects_tampering() {
        let k = key(1);
        let pkt = NimsaPacket::seal(
            &k,
            Ipv4Addr::new(10, 0, 0, 2),
            Ipv4Addr::new(192, 0, 2, 1),
            NimsaHeader::new(5, 0, 1, 0),
            b"hello".to_vec(),
        )
        .unwrap();
        assert!(verify_packet(&k, &pkt));

        let mut bad = pkt.clone();
        bad.header.auth_tag[31] ^= 0xff;
        assert!(!verify_packet(&k, &bad));

        let mut spoofed = pkt.clone();
        spoofed.ip.src_ip = Ipv4Addr::new(10, 0, 0, 3);
        assert!(!verify_packet(&k, &spoofed));

        let mut hop = pkt.clone();
        hop.ttl -= 1;
        assert!(verify_packet(&k, &hop));

        let mut short = pkt.clone();
        short.payload.pop();
        assert!(!verify_packet(&k, &short));

        let mut flagged = pkt;
        flagged.header.flags = 0x40;
        assert!(!verify_packet(&k, &flagged));
    }

    #[test]
    fn verify_rejects_neighbouring_seed_keys() {
        let material = [0x42u8; 64];
        for seed in 1..=100u32 {
            let k = crate::idnike::prf_session_key(&material, seed).unwrap();
            let wrong = crate::idnike::prf_session_key(&material, seed + 1).unwrap();
            let pkt = NimsaPacket::seal(
                &k,
                Ipv4Addr::new(10, 0, 0, 2),
                Ipv4Addr::new(192, 0, 2, 1),
                NimsaHeader::new(5, 0, seed, 0),
                vec![seed as u8; 16],
            )
            .unwrap();
            assert!(verify_packet(&k, &pkt));
            assert!(!verify_packet(&wrong, &pkt));
        }
    }

    #[test]
    fn empty_payload_packet() {
        let k = key(2);
        let pkt = NimsaPacket::seal(
            &k,
            Ipv4Addr::new(10, 0, 0, 2),
            Ipv4Addr::new(192, 0, 2, 1),
            NimsaHeader::new(5, 0, 2, FLAG_NOTIFICATION),
            Vec::new(),
        )
        .unwrap();
        assert_eq!(pkt.ip.payload_length, 0);
        assert_eq!(pkt.wire_len(), ENVELOPE_LEN + HEADER_LEN);
        assert!(pkt.header.is_notification());
        assert!(verify_packet(&k, &pkt));
    }

    #[test]
    fn packet_decode_errors() {
        let k = key(2);
        let pkt = NimsaPacket::seal(
            &k,
            Ipv4Addr::new(10, 0, 0, 2),
            Ipv4Addr::new(192, 0, 2, 1),
            NimsaHeader::new(5, 0, 2, 0),
            vec![1, 2, 3],
        )
        .unwrap();
        let mut bytes = pkt.encode().unwrap();
        bytes.push(0);
        assert!(matches!(NimsaPacket::decode(&bytes), Err(WireError::LengthMismatch { .. })));
        assert!(matches!(NimsaPacket::decode(&bytes[..20]), Err(WireError::Truncated { .. })));
    }

    proptest! {
        #[test]
        fn header_codec_inverse(mr_id: u64, if_num: u8, seed: u32, notify: bool, tag: [u8; 32]) {
            let h = NimsaHeader { version: VERSION, mr_id, if_num, seed, flags: u8::from(notify), auth_tag: tag };
            prop_assert_eq!(decode_header(&encode_header(&h).unwrap()).unwrap(), h);
        }

        #[test]
        fn packet_codec_inverse(mr_id: u64, seed in 1u32.., ttl: u8, payload in proptest::collection::vec(any::<u8>(), 0..200)) {
            let mut pkt = NimsaPacket::seal(&key(seed), Ipv4Addr::new(10, 1, 2, 3), Ipv4Addr::new(192, 0, 2, 1),
                                            NimsaHeader::new(mr_id, 3, seed, 0), payload).unwrap();
            pkt.ttl = ttl;
            prop_assert_eq!(NimsaPacket::decode(&pkt.encode().unwrap()).unwrap(), pkt);
        }
    }
}
