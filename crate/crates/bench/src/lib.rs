//! Shared fixtures for the criterion benches.

use std::net::Ipv4Addr;

use nimsa_core::idnike::{gen_master, setup};
use nimsa_core::{HaEndpoint, MrEndpoint, MrId, PairingSuite, SecurityLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const HA_IP: Ipv4Addr = Ipv4Addr::new(192, 0, 2, 1);

/// A registered router with one adapter up, and its home agent.
pub fn domain(level: SecurityLevel) -> (PairingSuite, MrEndpoint, HaEndpoint) {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let suite = setup(level, Some(1));
    let mut mr = MrEndpoint::new(suite.clone(), MrId::from_name("bench"), gen_master(&suite, &mut rng), b"HA", HA_IP)
        .expect("router");
    let mut ha = HaEndpoint::new(suite.clone(), b"HA", HA_IP);
    ha.register_mr(mr.mr_id(), mr.registration_voucher()).expect("register");
    mr.on_adapter_up(0, Ipv4Addr::new(10, 0, 0, 2)).expect("adapter");
    (suite, mr, ha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_domain_accepts_traffic() {
        let (_, mr, mut ha) = domain(SecurityLevel::Test);
        let pkt = mr.send(b"x".to_vec(), 0).unwrap();
        assert!(ha.on_packet(&pkt).is_accepted());
        assert!(ha.on_packet(&pkt).is_accepted());
    }
}
