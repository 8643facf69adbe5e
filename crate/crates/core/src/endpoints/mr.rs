use std::collections::{BTreeMap, VecDeque};
use std::net::Ipv4Addr;

use crate::idnike::{
    derive_session_key, private_point_from_hash, shared_from_hashed, HashedIdentity, IdentityLabel, MasterSecret,
    PairingSuite, PrivatePoint, SessionKey, SharedMaterial,
};
use crate::wire::{NimsaHeader, NimsaPacket, FLAG_NOTIFICATION};

use super::{EndpointError, MrId};

/// Key state of one router adapter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceState {
    pub if_num: u8,
    pub current_ip: Ipv4Addr,
    pub seed: u32,
    private_point: PrivatePoint,
    shared_material: SharedMaterial,
    session_key: SessionKey,
}

impl InterfaceState {
    pub fn private_point(&self) -> &PrivatePoint {
        &self.private_point
    }

    pub fn shared_material(&self) -> &SharedMaterial {
        &self.shared_material
    }

    pub fn session_key(&self) -> &SessionKey {
        &self.session_key
    }
}

/// Mobile router: its own PKG for the security domain shared with one HA.
#[derive(Debug, Clone)]
pub struct MrEndpoint {
    mr_id: MrId,
    suite: PairingSuite,
    master: MasterSecret,
    ha_label: IdentityLabel,
    ha_ip: Ipv4Addr,
    // H(ID_HA || IP_HA) never changes, so it is hashed once.
    ha_hashed: HashedIdentity,
    interfaces: BTreeMap<u8, InterfaceState>,
    pending: VecDeque<Vec<u8>>,
    seed_initial: u32,
}

impl MrEndpoint {
    pub fn new(
        suite: PairingSuite,
        mr_id: MrId,
        master: MasterSecret,
        ha_id: &[u8],
        ha_ip: Ipv4Addr,
    ) -> Result<Self, EndpointError> {
        let ha_label = IdentityLabel::home_agent(ha_id.to_vec(), ha_ip.octets().to_vec());
        let ha_hashed = HashedIdentity::of(&suite, &ha_label)?;
        Ok(MrEndpoint {
            mr_id,
            suite,
            master,
            ha_label,
            ha_ip,
            ha_hashed,
            interfaces: BTreeMap::new(),
            pending: VecDeque::new(),
            seed_initial: 1,
        })
    }

    /// Starting value of every adapter's seed counter (default 1).
    pub fn with_seed_initial(mut self, seed_initial: u32) -> Result<Self, EndpointError> {
        if seed_initial == 0 {
            return Err(crate::idnike::IdnikeError::ZeroSeed.into());
        }
        self.seed_initial = seed_initial;
        Ok(self)
    }

    pub fn mr_id(&self) -> MrId {
        self.mr_id
    }

    pub fn ha_ip(&self) -> Ipv4Addr {
        self.ha_ip
    }

    pub fn ha_label(&self) -> &IdentityLabel {
        &self.ha_label
    }

    /// `S_HA^MR = s * H(ID_HA || IP_HA)`, handed to the HA out of band.
    pub fn registration_voucher(&self) -> PrivatePoint {
        private_point_from_hash(&self.master, &self.ha_hashed)
    }

    fn key_state(&self, if_num: u8, ip: Ipv4Addr, seed: u32) -> Result<InterfaceState, EndpointError> {
        let label = IdentityLabel::interface(self.mr_id.label_bytes().to_vec(), ip.octets().to_vec(), if_num);
        let private_point = private_point_from_hash(&self.master, &HashedIdentity::of(&self.suite, &label)?);
        let shared_material = shared_from_hashed(&self.suite, &private_point, &self.ha_hashed)?;
        let session_key = derive_session_key(&shared_material, seed)?;
        Ok(InterfaceState { if_num, current_ip: ip, seed, private_point, shared_material, session_key })
    }

    pub fn on_adapter_up(&mut self, if_num: u8, ip: Ipv4Addr) -> Result<(), EndpointError> {
        if self.interfaces.contains_key(&if_num) {
            return Err(EndpointError::DuplicateInterface(if_num));
        }
        let state = self.key_state(if_num, ip, self.seed_initial)?;
        self.interfaces.insert(if_num, state);
        Ok(())
    }

    /// Rekeys an adapter for its new address.
    ///
    /// With data waiting the next data packet carries the new state and
    /// nothing is returned; when idle a single notification packet is
    /// returned, already authenticated under the new key.
    pub fn on_adapter_change(&mut self, if_num: u8, new_ip: Ipv4Addr) -> Result<Option<NimsaPacket>, EndpointError> {
        let current = self.interfaces.get(&if_num).ok_or(EndpointError::UnknownInterface(if_num))?;
        if current.current_ip == new_ip {
            return Err(EndpointError::SameAddress(if_num));
        }
        let next_seed = current.seed.checked_add(1).ok_or(crate::idnike::IdnikeError::ZeroSeed)?;
        let state = self.key_state(if_num, new_ip, next_seed)?;
        self.interfaces.insert(if_num, state);
        if self.pending.is_empty() {
            Ok(Some(self.seal(if_num, FLAG_NOTIFICATION, Vec::new())?))
        } else {
            Ok(None)
        }
    }

    pub fn enqueue(&mut self, payload: Vec<u8>) {
        self.pending.push_back(payload);
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Authenticates `payload` on the scheduler-chosen adapter.
    pub fn send(&self, payload: Vec<u8>, chosen_if: u8) -> Result<NimsaPacket, EndpointError> {
        self.seal(chosen_if, 0, payload)
    }

    /// Pops the oldest queued payload and sends it on `chosen_if`.
    pub fn send_next(&mut self, chosen_if: u8) -> Result<Option<NimsaPacket>, EndpointError> {
        if !self.interfaces.contains_key(&chosen_if) {
            return Err(EndpointError::UnknownInterface(chosen_if));
        }
        match self.pending.pop_front() {
            Some(payload) => self.send(payload, chosen_if).map(Some),
            None => Ok(None),
        }
    }

    fn seal(&self, if_num: u8, flags: u8, payload: Vec<u8>) -> Result<NimsaPacket, EndpointError> {
        let st = self.interfaces.get(&if_num).ok_or(EndpointError::UnknownInterface(if_num))?;
        let header = NimsaHeader::new(self.mr_id.0, if_num, st.seed, flags);
        Ok(NimsaPacket::seal(&st.session_key, st.current_ip, self.ha_ip, header, payload)?)
    }

    pub fn interface(&self, if_num: u8) -> Option<&InterfaceState> {
        self.interfaces.get(&if_num)
    }

    pub fn interfaces(&self) -> impl Iterator<Item = &InterfaceState> {
        self.interfaces.values()
    }
}
