use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use crate::idnike::{
    derive_session_key, shared_from_hashed, HashedIdentity, IdentityLabel, PairingSuite, PrivatePoint, SessionKey,
    SharedMaterial, Side,
};
use crate::wire::{verify_packet, NimsaPacket};

use super::{EndpointError, MrId, VerdictReason};

/// What the HA remembers about one adapter of a registered router.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceRecord {
    pub known_ip: Ipv4Addr,
    pub seed: u32,
    pub shared_material: SharedMaterial,
    pub session_key: SessionKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationRecord {
    pub mr_id: MrId,
    pub ha_private_point: PrivatePoint,
    pub per_interface: BTreeMap<u8, InterfaceRecord>,
    pub revoked: bool,
}

/// Home agent with its security-domain database.
#[derive(Debug, Clone)]
pub struct HaEndpoint {
    ha_id: Vec<u8>,
    ha_ip: Ipv4Addr,
    suite: PairingSuite,
    registry: BTreeMap<MrId, RegistrationRecord>,
    pairings: u64,
}

impl HaEndpoint {
    pub fn new(suite: PairingSuite, ha_id: &[u8], ha_ip: Ipv4Addr) -> Self {
        HaEndpoint { ha_id: ha_id.to_vec(), ha_ip, suite, registry: BTreeMap::new(), pairings: 0 }
    }

    pub fn ha_id(&self) -> &[u8] {
        &self.ha_id
    }

    pub fn ha_ip(&self) -> Ipv4Addr {
        self.ha_ip
    }

    /// Stores `S_HA^MR` received over the trusted registration channel.
    ///
    /// A revoked record may be replaced; an active one may not.
    pub fn register_mr(&mut self, mr_id: MrId, ha_private_point: PrivatePoint) -> Result<(), EndpointError> {
        if ha_private_point.side() != Side::HomeAgent {
            return Err(EndpointError::WrongVoucher);
        }
        if self.registry.get(&mr_id).is_some_and(|r| !r.revoked) {
            return Err(EndpointError::DuplicateRegistration(mr_id));
        }
        self.registry.insert(
            mr_id,
            RegistrationRecord { mr_id, ha_private_point, per_interface: BTreeMap::new(), revoked: false },
        );
        Ok(())
    }

    /// Marks the router's record revoked. Revoking twice is a no-op.
    pub fn revoke_mr(&mut self, mr_id: MrId) -> Result<(), EndpointError> {
        let rec = self.registry.get_mut(&mr_id).ok_or(EndpointError::UnknownDevice(mr_id))?;
        rec.revoked = true;
        rec.per_interface.clear();
        Ok(())
    }

    pub fn record(&self, mr_id: MrId) -> Option<&RegistrationRecord> {
        self.registry.get(&mr_id)
    }

    pub fn registry(&self) -> &BTreeMap<MrId, RegistrationRecord> {
        &self.registry
    }

    /// Number of pairings computed so far.
    pub fn pairings_computed(&self) -> u64 {
        self.pairings
    }

    /// Parses raw bytes first; parse failures are `DropMalformed`.
    pub fn on_wire(&mut self, bytes: &[u8]) -> VerdictReason {
        match NimsaPacket::decode(bytes) {
            Ok(pkt) => self.on_packet(&pkt),
            Err(_) => VerdictReason::DropMalformed,
        }
    }

    /// Classifies one packet and, only if it authenticates, updates state.
    pub fn on_packet(&mut self, pkt: &NimsaPacket) -> VerdictReason {
        let h = &pkt.header;
        if h.seed == 0 || h.prefix().is_err() || usize::from(pkt.ip.payload_length) != pkt.payload.len() {
            return VerdictReason::DropMalformed;
        }
        let mr_id = MrId(h.mr_id);
        let Some(rec) = self.registry.get(&mr_id) else {
            return VerdictReason::DropUnknownDevice;
        };
        if rec.revoked {
            return VerdictReason::DropRevoked;
        }
        let src = pkt.ip.src_ip;

        let (verdict, material) = match rec.per_interface.get(&h.if_num) {
            None => (VerdictReason::AcceptedNewInterface, None),
            Some(known) if h.seed < known.seed => return VerdictReason::DropSeedRollback,
            Some(known) if src != known.known_ip => (VerdictReason::AcceptedAfterHandover, None),
            // Same address, newer seed: the pairing output is unchanged, only the PRF input moves.
            Some(known) if h.seed > known.seed => (VerdictReason::AcceptedAfterHandover, Some(known.shared_material)),
            Some(known) => {
                return if verify_packet(&known.session_key, pkt) {
                    VerdictReason::Accepted
                } else {
                    VerdictReason::DropAuthFail
                };
            }
        };

        let ha_point = rec.ha_private_point;
        let material = match material {
            Some(m) => m,
            None => match self.material_for(mr_id, src, h.if_num, &ha_point) {
                Some(m) => m,
                None => return VerdictReason::DropMalformed,
            },
        };
        let Ok(session_key) = derive_session_key(&material, h.seed) else {
            return VerdictReason::DropMalformed;
        };
        if !verify_packet(&session_key, pkt) {
            return VerdictReason::DropAuthFail;
        }
        let rec = self.registry.get_mut(&mr_id).expect("record checked above");
        rec.per_interface
            .insert(h.if_num, InterfaceRecord { known_ip: src, seed: h.seed, shared_material: material, session_key });
        verdict
    }

    /// `K = e(H(ID_MR || src || IF), S_HA^MR)`.
    fn material_for(
        &mut self,
        mr_id: MrId,
        src: Ipv4Addr,
        if_num: u8,
        ha_point: &PrivatePoint,
    ) -> Option<SharedMaterial> {
        let label = IdentityLabel::interface(mr_id.label_bytes().to_vec(), src.octets().to_vec(), if_num);
        let hashed = HashedIdentity::of(&self.suite, &label).ok()?;
        self.pairings += 1;
        shared_from_hashed(&self.suite, ha_point, &hashed).ok()
    }
}
