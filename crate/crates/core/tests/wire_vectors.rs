//! Byte-exact vectors. Tags were computed with an independent HMAC-SHA256
//! implementation over the documented tag input.

use std::net::Ipv4Addr;

use nimsa_core::idnike::{encode_label, SessionKey};
use nimsa_core::{NimsaHeader, NimsaPacket};

fn unhex(s: &str) -> Vec<u8> {
    s.split_whitespace().map(|b| u8::from_str_radix(b, 16).unwrap()).collect()
}

const PACKET: &str = "
    0a 01 00 02 c0 00 02 01 40 00 05 01 01 02 03 04
    05 06 07 08 01 00 00 00 02 00 e7 03 ee 92 6b 07
    59 17 b5 ac 2f c3 f3 09 ab ba 42 af 3c 81 ac 82
    d1 d2 1a 19 5f 61 0e 91 d5 0f 68 65 6c 6c 6f";

#[test]
fn sealed_packet_matches_vector() {
    let key = SessionKey::from_bytes([0x11; 32], 2);
    let header = NimsaHeader::new(0x0102_0304_0506_0708, 1, 2, 0);
    let pkt =
        NimsaPacket::seal(&key, Ipv4Addr::new(10, 1, 0, 2), Ipv4Addr::new(192, 0, 2, 1), header, b"hello".to_vec())
            .unwrap();
    assert_eq!(pkt.encode().unwrap(), unhex(PACKET));
    assert_eq!(NimsaPacket::decode(&unhex(PACKET)).unwrap(), pkt);
}

#[test]
fn label_vectors() {
    assert_eq!(encode_label(b"MR", &[10, 1, 0, 2], Some(1)).unwrap(), unhex("00 02 4d 52 00 04 0a 01 00 02 01 01"));
    assert_eq!(encode_label(b"HA", &[192, 0, 2, 1], None).unwrap(), unhex("00 02 48 41 00 04 c0 00 02 01"));
}
