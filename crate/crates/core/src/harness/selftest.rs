//! Crypto, wire and endpoint self-checks with optional fault injection.

use std::net::Ipv4Addr;

use ark_bls12_381::Fr;
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;

use crate::endpoints::{HaEndpoint, MrEndpoint, MrId, VerdictReason};
use crate::idnike::{
    derive_private_point, gen_master, prf_session_key, setup, shared_from_private, IdentityLabel, PRF_TAG,
};
use crate::wire::{NimsaHeader, NimsaPacket};
use crate::SecurityLevel;

/// Deliberate breakage used to show that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// The HA is provisioned with a voucher from a different master secret.
    MasterMismatch,
    /// The group order used for exponent arithmetic is off by two.
    CorruptOrder,
}

impl std::str::FromStr for Fault {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "master-mismatch" => Ok(Fault::MasterMismatch),
            "corrupt-order" => Ok(Fault::CorruptOrder),
            other => Err(format!("unknown fault {other:?} (expected master-mismatch or corrupt-order)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, failures: usize, total: usize) -> PropertyResult {
    PropertyResult {
        name,
        passed: failures == 0,
        detail: if failures == 0 { format!("{total}/{total} ok") } else { format!("{failures}/{total} failed") },
    }
}

/// Runs every property with `samples` random draws each.
pub fn selftest(level: SecurityLevel, samples: usize, seed: u64, faults: &[Fault]) -> Vec<PropertyResult> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let suite = setup(level, Some(seed));
    let mut order = suite.group_order();
    if faults.contains(&Fault::CorruptOrder) {
        order += 2u32;
    }
    let mut out = Vec::new();

    // e(aP, bQ) == e(P, Q)^(ab mod q)
    let (p, q) = (suite.generator_g1(), suite.generator_g2());
    let base = suite.pairing(&p, &q);
    let mut bad = 0;
    for _ in 0..samples {
        let (a, b) = (Fr::rand(&mut rng), Fr::rand(&mut rng));
        let lhs = suite.pairing(&(p * a).into_affine(), &(q * b).into_affine());
        let ab = (to_big(&a) * to_big(&b)) % &order;
        if lhs != base.mul_bigint(ab.to_u64_digits()) {
            bad += 1;
        }
    }
    out.push(result("bilinearity", bad, samples));

    let degenerate = base.is_zero() || p.is_zero() || q.is_zero();
    out.push(result("non_degeneracy", usize::from(degenerate), 1));

    let mut bad = 0;
    for _ in 0..samples {
        let master = gen_master(&suite, &mut rng);
        let ha_master =
            if faults.contains(&Fault::MasterMismatch) { gen_master(&suite, &mut rng) } else { master.clone() };
        let mr = IdentityLabel::interface(rng.gen::<[u8; 8]>().to_vec(), rng.gen::<[u8; 4]>().to_vec(), rng.gen());
        let ha = IdentityLabel::home_agent(b"HA".to_vec(), rng.gen::<[u8; 4]>().to_vec());
        let agree = (|| {
            let s_if = derive_private_point(&suite, &master, &mr)?;
            let s_ha = derive_private_point(&suite, &ha_master, &ha)?;
            Ok::<_, crate::idnike::IdnikeError>(
                shared_from_private(&suite, &s_if, &ha)?.to_bytes()
                    == shared_from_private(&suite, &s_ha, &mr)?.to_bytes(),
            )
        })();
        if agree != Ok(true) {
            bad += 1;
        }
    }
    out.push(result("key_agreement", bad, samples));

    let mut bad = 0;
    for _ in 0..samples {
        let ikm: [u8; 32] = rng.gen();
        let seed: u32 = rng.gen_range(1..=u32::MAX);
        let ok = prf_session_key(&ikm, seed).map(|k| *k.key_bytes() == reference_prf(&ikm, seed)).unwrap_or(false);
        bad += usize::from(!ok);
    }
    out.push(result("prf_reference", bad, samples));

    let mut bad = 0;
    for _ in 0..samples {
        let key = crate::idnike::SessionKey::from_bytes(rng.gen(), 1);
        let payload: Vec<u8> = (0..rng.gen_range(0..200)).map(|_| rng.gen()).collect();
        let src = Ipv4Addr::from(rng.gen::<u32>());
        let header = NimsaHeader::new(rng.gen(), rng.gen(), rng.gen_range(1..=u32::MAX), 0);
        let ok = NimsaPacket::seal(&key, src, Ipv4Addr::new(192, 0, 2, 1), header, payload)
            .ok()
            .and_then(|pkt| {
                let bytes = pkt.encode().ok()?;
                let back = NimsaPacket::decode(&bytes).ok()?;
                let mut forged = back.clone();
                forged.header.auth_tag[rng.gen_range(0..32)] ^= 1 << rng.gen_range(0..8);
                Some(
                    back == pkt
                        && crate::wire::verify_packet(&key, &back)
                        && !crate::wire::verify_packet(&key, &forged),
                )
            })
            .unwrap_or(false);
        bad += usize::from(!ok);
    }
    out.push(result("wire_seal_verify", bad, samples));

    out.push(endpoint_flow(&suite, &mut rng, faults));
    out
}

fn to_big(x: &Fr) -> BigUint {
    BigUint::from_bytes_le(&x.into_bigint().to_bytes_le())
}

/// HKDF-SHA256 written out with raw HMAC, independent of the `hkdf` crate.
fn reference_prf(ikm: &[u8], seed: u32) -> [u8; 32] {
    type H = Hmac<Sha256>;
    let mut ext = <H as Mac>::new_from_slice(PRF_TAG).expect("any key");
    ext.update(ikm);
    let prk = ext.finalize().into_bytes();
    let mut exp = <H as Mac>::new_from_slice(&prk).expect("any key");
    exp.update(b"NIMSA-v1 session key");
    exp.update(&seed.to_be_bytes());
    exp.update(&[1]);
    exp.finalize().into_bytes().into()
}

/// Registration, first packet, handover, replay and tamper handling.
fn endpoint_flow(suite: &crate::PairingSuite, rng: &mut ChaCha20Rng, faults: &[Fault]) -> PropertyResult {
    let name = "endpoint_flow";
    let mut run = || -> Result<Vec<(VerdictReason, VerdictReason)>, crate::endpoints::EndpointError> {
        let ha_ip = Ipv4Addr::new(192, 0, 2, 1);
        let master = gen_master(suite, rng);
        let mut mr = MrEndpoint::new(suite.clone(), MrId::from_name("selftest"), master, b"HA", ha_ip)?;
        let mut ha = HaEndpoint::new(suite.clone(), b"HA", ha_ip);
        let voucher = if faults.contains(&Fault::MasterMismatch) {
            MrEndpoint::new(suite.clone(), mr.mr_id(), gen_master(suite, rng), b"HA", ha_ip)?.registration_voucher()
        } else {
            mr.registration_voucher()
        };
        ha.register_mr(mr.mr_id(), voucher)?;
        mr.on_adapter_up(0, Ipv4Addr::new(10, 0, 0, 2))?;
        let first = mr.send(b"first".to_vec(), 0)?;
        let mut checks = vec![(ha.on_packet(&first), VerdictReason::AcceptedNewInterface)];
        mr.enqueue(b"moved".to_vec());
        mr.on_adapter_change(0, Ipv4Addr::new(10, 0, 1, 2))?;
        let moved = mr.send_next(0)?.expect("queued");
        checks.push((ha.on_packet(&moved), VerdictReason::AcceptedAfterHandover));
        checks.push((ha.on_packet(&first), VerdictReason::DropSeedRollback));
        let mut tampered = mr.send(b"data".to_vec(), 0)?;
        tampered.payload[0] ^= 0x01;
        checks.push((ha.on_packet(&tampered), VerdictReason::DropAuthFail));
        Ok(checks)
    };
    match run() {
        Ok(checks) => {
            let bad: Vec<String> =
                checks.iter().filter(|(got, want)| got != want).map(|(got, want)| format!("{got} != {want}")).collect();
            PropertyResult {
                name,
                passed: bad.is_empty(),
                detail: if bad.is_empty() { "ok".into() } else { bad.join("; ") },
            }
        }
        Err(e) => PropertyResult { name, passed: false, detail: e.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failed(results: &[PropertyResult]) -> Vec<&'static str> {
        results.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }

    #[test]
    fn clean_build_passes() {
        let r = selftest(SecurityLevel::Test, 5, 1, &[]);
        assert_eq!(r.len(), 6);
        assert!(failed(&r).is_empty(), "{r:?}");
    }

    #[test]
    fn master_mismatch_breaks_key_agreement() {
        let r = selftest(SecurityLevel::Test, 5, 1, &[Fault::MasterMismatch]);
        assert_eq!(failed(&r), vec!["key_agreement", "endpoint_flow"]);
    }

    #[test]
    fn corrupt_order_breaks_bilinearity() {
        let r = selftest(SecurityLevel::Test, 5, 1, &[Fault::CorruptOrder]);
        assert_eq!(failed(&r), vec!["bilinearity"]);
    }

    #[test]
    fn fault_names() {
        assert_eq!("master-mismatch".parse(), Ok(Fault::MasterMismatch));
        assert_eq!("corrupt-order".parse(), Ok(Fault::CorruptOrder));
        assert!("other".parse::<Fault>().is_err());
    }
}
