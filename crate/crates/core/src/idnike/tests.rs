use std::collections::HashSet;

use ark_bls12_381::{Fr, G1Affine, G2Affine};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{One, UniformRand};
use hmac::{Hmac, Mac};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::Sha256;

use super::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_ip(rng: &mut impl Rng) -> Vec<u8> {
    rng.gen::<[u8; 4]>().to_vec()
}

#[test]
fn bilinearity_small_scalars() {
    let suite = setup(SecurityLevel::Standard, None);
    let p = suite.generator_g1();
    let q = suite.generator_g2();
    let lhs = suite.pairing(&(p * Fr::from(2u64)).into_affine(), &(q * Fr::from(3u64)).into_affine());
    assert_eq!(lhs, suite.pairing(&p, &q) * Fr::from(6u64));
}

#[test]
fn non_degenerate() {
    let suite = setup(SecurityLevel::Test, Some(1));
    let e = suite.pairing(&suite.generator_g1(), &suite.generator_g2());
    assert_ne!(e, Gt::default());
}

#[test]
fn seeded_setup_is_deterministic() {
    let a = setup(SecurityLevel::Test, Some(42));
    let b = setup(SecurityLevel::Test, Some(42));
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_ne!(a.to_bytes(), setup(SecurityLevel::Test, Some(43)).to_bytes());
    assert_eq!(PairingSuite::from_bytes(&a.to_bytes()).unwrap(), a);
}

#[test]
fn unsupported_profile_is_rejected() {
    assert!(matches!("paranoid".parse::<SecurityLevel>(), Err(IdnikeError::UnsupportedProfile(_))));
    assert_eq!("standard".parse::<SecurityLevel>().unwrap(), SecurityLevel::Standard);
}

#[test]
fn g1_round_trip_random_elements() {
    let mut r = rng(7);
    let suite = setup(SecurityLevel::Standard, None);
    for _ in 0..100 {
        let p = (suite.generator_g1() * Fr::rand(&mut r)).into_affine();
        assert_eq!(codec::g1_from_bytes(&codec::g1_to_bytes(&p)).unwrap(), p);
    }
}

#[test]
fn other_kinds_round_trip() {
    let mut r = rng(8);
    let suite = setup(SecurityLevel::Test, Some(8));
    for _ in 0..5 {
        let a = Fr::rand(&mut r);
        let q = (suite.generator_g2() * a).into_affine();
        assert_eq!(codec::g2_from_bytes(&codec::g2_to_bytes(&q)).unwrap(), q);
        assert_eq!(codec::scalar_from_bytes(&codec::scalar_to_bytes(&a)).unwrap(), a);
        let k = SharedMaterial::from_gt(suite.pairing(&suite.generator_g1(), &q));
        assert_eq!(SharedMaterial::from_bytes(&k.to_bytes()).unwrap(), k);
    }
    // q itself is not a valid scalar encoding.
    let order = suite.group_order().to_bytes_be();
    assert!(codec::scalar_from_bytes(&order).is_err());
    assert_eq!(codec::scalar_to_bytes(&Fr::one())[31], 1);
}

#[test]
fn point_decoding_rejects_garbage() {
    assert!(codec::g1_from_bytes(&[0xff; 48]).is_err());
    assert!(codec::g1_from_bytes(&[0u8; 47]).is_err());
    assert!(PrivatePoint::from_bytes(&[0x03; 49]).is_err());
}

#[test]
fn gen_master_rejects_zero_draw() {
    let mut draws = [Fr::from(0u64), Fr::from(7u64)].into_iter();
    let s = MasterSecret::sample_with(|| draws.next().unwrap());
    assert_eq!(*s.scalar(), Fr::from(7u64));
    assert_eq!(MasterSecret::from_u64(0), Err(IdnikeError::ZeroMaster));
}

#[test]
fn gen_master_distinct_across_seeds() {
    let suite = setup(SecurityLevel::Test, Some(0));
    let mut seen = HashSet::new();
    for i in 0..100u64 {
        let a = gen_master(&suite, &mut rng(2 * i));
        let b = gen_master(&suite, &mut rng(2 * i + 1));
        assert_ne!(a, b);
        assert!(seen.insert(codec::scalar_to_bytes(a.scalar())));
    }
}

#[test]
fn gen_master_in_range() {
    let suite = setup(SecurityLevel::Test, Some(0));
    let q = suite.group_order();
    let mut r = rng(99);
    for _ in 0..1000 {
        let s = gen_master(&suite, &mut r);
        let v = num_bigint::BigUint::from_bytes_be(&codec::scalar_to_bytes(s.scalar()));
        assert!(v >= num_bigint::BigUint::from(1u8) && v < q);
    }
}

#[test]
fn label_encoding_layout() {
    let ha = encode_label(b"HA", &[192, 0, 2, 1], None).unwrap();
    assert_eq!(ha, vec![0, 2, b'H', b'A', 0, 4, 192, 0, 2, 1]);
    assert_eq!(ha, encode_label(b"HA", &[192, 0, 2, 1], None).unwrap());

    let a = encode_label(b"MR1", &[10, 0, 0, 2], Some(0)).unwrap();
    let b = encode_label(b"MR1", b"10.0.0.20", None).unwrap();
    assert_ne!(a, b);
    assert_eq!(&a[a.len() - 2..], &[0x01, 0x00]);
}

#[test]
fn label_encoding_errors() {
    assert_eq!(encode_label(b"", b"x", None), Err(IdnikeError::EmptyDeviceId));
    let big = vec![0u8; 65_536];
    assert_eq!(encode_label(b"id", &big, None), Err(IdnikeError::FieldTooLong(65_536)));
    assert!(encode_label(&big[..65_535], b"", Some(1)).is_ok());
}

#[test]
fn label_encoding_has_no_collisions() {
    let mut r = rng(11);
    let mut triples = HashSet::new();
    let mut encodings = HashSet::new();
    for _ in 0..10_000 {
        // Short fields over a tiny alphabet so that concatenation ambiguities are likely.
        let id: Vec<u8> = (0..r.gen_range(1..4)).map(|_| r.gen_range(0..3)).collect();
        let ip: Vec<u8> = (0..r.gen_range(0..4)).map(|_| r.gen_range(0..3)).collect();
        let if_num = if r.gen_bool(0.5) { Some(r.gen_range(0..3)) } else { None };
        let enc = encode_label(&id, &ip, if_num).unwrap();
        if triples.insert((id, ip, if_num)) {
            assert!(encodings.insert(enc), "collision");
        }
    }
    assert_eq!(triples.len(), encodings.len());
}

#[test]
fn private_point_with_unit_secret_is_the_hash() {
    let suite = setup(SecurityLevel::Standard, None);
    let label = IdentityLabel::interface(b"MR1".to_vec(), vec![10, 0, 0, 2], 0);
    let one = MasterSecret::from_u64(1).unwrap();
    let expected = suite.hash_to_g1(&label.encode().unwrap());
    assert_eq!(derive_private_point(&suite, &one, &label).unwrap(), PrivatePoint::Router(expected));
}

#[test]
fn private_point_deterministic_and_linear() {
    let suite = setup(SecurityLevel::Test, Some(3));
    let mut r = rng(3);
    let s = Fr::rand(&mut r);
    let m1 = MasterSecret::from_scalar(s).unwrap();
    let m2 = MasterSecret::from_scalar(s + s).unwrap();
    let ha = IdentityLabel::home_agent(b"HA".to_vec(), vec![192, 0, 2, 1]);
    let p1 = derive_private_point(&suite, &m1, &ha).unwrap();
    assert_eq!(p1.to_bytes(), derive_private_point(&suite, &m1, &ha).unwrap().to_bytes());
    let (PrivatePoint::HomeAgent(a), PrivatePoint::HomeAgent(b)) =
        (p1, derive_private_point(&suite, &m2, &ha).unwrap())
    else {
        panic!("home agent labels hash into G2");
    };
    // Group-law oracle: doubling via addition of the point to itself.
    assert_eq!(b, (a.into_group() + a).into_affine());
    assert_eq!(PrivatePoint::from_bytes(&p1.to_bytes()).unwrap(), p1);
}

fn random_domain(r: &mut ChaCha8Rng) -> (MasterSecret, IdentityLabel, IdentityLabel) {
    let master = MasterSecret::sample_with(|| Fr::rand(r));
    let id: Vec<u8> = r.gen::<[u8; 8]>().to_vec();
    let mr = IdentityLabel::interface(id, random_ip(r), r.gen());
    let ha = IdentityLabel::home_agent(b"HA-1".to_vec(), random_ip(r));
    (master, mr, ha)
}

#[test]
fn both_sides_derive_identical_material() {
    let suite = setup(SecurityLevel::Standard, Some(5));
    let mut r = rng(5);
    for _ in 0..10 {
        let (master, mr, ha) = random_domain(&mut r);
        let s_if = derive_private_point(&suite, &master, &mr).unwrap();
        let s_ha = derive_private_point(&suite, &master, &ha).unwrap();
        let k_mr = shared_from_private(&suite, &s_if, &ha).unwrap();
        let k_ha = shared_from_private(&suite, &s_ha, &mr).unwrap();
        assert_eq!(k_mr.to_bytes(), k_ha.to_bytes());
    }
}

#[test]
fn adapter_index_changes_material() {
    let suite = setup(SecurityLevel::Test, Some(6));
    let mut r = rng(6);
    for _ in 0..50 {
        let (master, mut mr, ha) = random_domain(&mut r);
        mr.if_num = Some(0);
        let k0 = shared_from_private(&suite, &derive_private_point(&suite, &master, &mr).unwrap(), &ha).unwrap();
        mr.if_num = Some(1);
        let k1 = shared_from_private(&suite, &derive_private_point(&suite, &master, &mr).unwrap(), &ha).unwrap();
        assert_ne!(k0, k1);
    }
}

#[test]
fn unit_secret_cross_check() {
    let suite = setup(SecurityLevel::Standard, None);
    let one = MasterSecret::from_u64(1).unwrap();
    let mr = IdentityLabel::interface(b"MR".to_vec(), vec![10, 0, 0, 9], 2);
    let ha = IdentityLabel::home_agent(b"HA".to_vec(), vec![192, 0, 2, 1]);
    let h_mr: G1Affine = suite.hash_to_g1(&mr.encode().unwrap());
    let h_ha: G2Affine = suite.hash_to_g2(&ha.encode().unwrap());
    let direct = suite.pairing(&h_mr, &h_ha);
    let via_mr = shared_from_private(&suite, &derive_private_point(&suite, &one, &mr).unwrap(), &ha).unwrap();
    let via_ha = shared_from_private(&suite, &derive_private_point(&suite, &one, &ha).unwrap(), &mr).unwrap();
    assert_eq!(*via_mr.gt(), direct);
    assert_eq!(*via_ha.gt(), direct);
}

#[test]
fn same_side_pairing_is_rejected() {
    let suite = setup(SecurityLevel::Test, Some(1));
    let m = MasterSecret::from_u64(9).unwrap();
    let mr = IdentityLabel::interface(b"MR".to_vec(), vec![1], 0);
    let own = derive_private_point(&suite, &m, &mr).unwrap();
    assert_eq!(shared_from_private(&suite, &own, &mr), Err(IdnikeError::SideMismatch));
}

#[test]
fn test_profile_hashes_land_in_the_subgroup() {
    let suite = setup(SecurityLevel::Test, Some(1));
    for i in 0..20u8 {
        let p = suite.hash_to_g1(&[i]);
        let q = suite.hash_to_g2(&[i]);
        assert!(p.is_on_curve() && p.is_in_correct_subgroup_assuming_on_curve() && !p.is_zero());
        assert!(q.is_on_curve() && q.is_in_correct_subgroup_assuming_on_curve() && !q.is_zero());
    }
    assert_ne!(suite.hash_to_g1(b"a"), setup(SecurityLevel::Standard, Some(1)).hash_to_g1(b"a"));
}

/// HKDF-SHA256 written out with raw HMAC calls.
fn hkdf_oracle(salt: &[u8], ikm: &[u8], info: &[u8]) -> [u8; 32] {
    let mut ext = Hmac::<Sha256>::new_from_slice(salt).unwrap();
    ext.update(ikm);
    let prk = ext.finalize().into_bytes();
    let mut exp = Hmac::<Sha256>::new_from_slice(&prk).unwrap();
    exp.update(info);
    exp.update(&[0x01]);
    exp.finalize().into_bytes().into()
}

#[test]
fn session_key_matches_reference_kdf() {
    let mut ikm = [0u8; codec::GT_BYTES];
    ikm[codec::GT_BYTES - 1] = 1;
    let key = prf_session_key(&ikm, 1).unwrap();
    let expected = hkdf_oracle(b"NIMSA-v1", &ikm, b"NIMSA-v1 session key\x00\x00\x00\x01");
    assert_eq!(key.key_bytes(), &expected);
    assert_eq!(key.seed(), 1);
}

#[test]
fn session_key_determinism_and_seed_sensitivity() {
    let suite = setup(SecurityLevel::Test, Some(2));
    let k = SharedMaterial::from_gt(suite.pairing(&suite.generator_g1(), &suite.generator_g2()));
    let a = derive_session_key(&k, 1).unwrap();
    assert_eq!(a, derive_session_key(&k, 1).unwrap());
    assert_ne!(a.key_bytes(), derive_session_key(&k, 2).unwrap().key_bytes());
    assert_eq!(derive_session_key(&k, 0), Err(IdnikeError::ZeroSeed));
}

#[test]
fn session_key_avalanche() {
    let mut r = rng(21);
    let mut flipped_bits = 0u32;
    const TRIALS: u32 = 100;
    for _ in 0..TRIALS {
        let ikm: [u8; 64] = std::array::from_fn(|_| r.gen());
        let seed: u32 = r.gen_range(1..u32::MAX / 2);
        let other = seed ^ (1 << r.gen_range(0..31));
        let a = prf_session_key(&ikm, seed).unwrap();
        let b = prf_session_key(&ikm, other.max(1)).unwrap();
        flipped_bits += a.key_bytes().iter().zip(b.key_bytes()).map(|(x, y)| (x ^ y).count_ones()).sum::<u32>();
    }
    let mean_fraction = f64::from(flipped_bits) / f64::from(TRIALS * 256);
    assert!(mean_fraction >= 0.25, "mean flipped fraction {mean_fraction}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn key_agreement_is_symmetric(s in 1u64.., id in proptest::collection::vec(any::<u8>(), 1..16),
                                  ip in any::<[u8; 4]>(), if_num in any::<u8>(), ha_ip in any::<[u8; 4]>()) {
        let suite = setup(SecurityLevel::Test, Some(9));
        let master = MasterSecret::from_u64(s).unwrap();
        let mr = IdentityLabel::interface(id, ip.to_vec(), if_num);
        let ha = IdentityLabel::home_agent(b"HA".to_vec(), ha_ip.to_vec());
        let k_mr = shared_from_private(&suite, &derive_private_point(&suite, &master, &mr).unwrap(), &ha).unwrap();
        let k_ha = shared_from_private(&suite, &derive_private_point(&suite, &master, &ha).unwrap(), &mr).unwrap();
        prop_assert_eq!(k_mr.to_bytes(), k_ha.to_bytes());
    }

    #[test]
    fn g1_codec_round_trips(k in 1u64..) {
        let p = (G1Affine::generator() * Fr::from(k)).into_affine();
        prop_assert_eq!(codec::g1_from_bytes(&codec::g1_to_bytes(&p)).unwrap(), p);
    }
}
