//! The event loop. One trial owns its links, endpoints and RNG; trials of a
//! scenario differ only in their RNG stream (`seed + trial`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::net::Ipv4Addr;

use rand::SeedableRng;
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rayon::prelude::*;

use super::edpf::edpf_pick_among;
use super::link::LinkState;
use super::metrics::{GoodputSample, MetricsReport, OwdSample, PacketCounts};
use super::reorder::ReorderBuffer;
use super::scenario::{HandoverMode, Scenario, Scheme, StopOn, TrafficKind};
use super::traffic::cbr_spacing_us;
use super::SimError;
use crate::endpoints::{HaEndpoint, MrEndpoint, MrId};
use crate::idnike::{gen_master, setup};
use crate::ike::{AhPacket, IkeAction, IkeMessage, IkeMsgKind, IkeResponder, IkeSession, IkeState};
use crate::time::SimTime;
use crate::wire::{ImmutableIpFields, NimsaPacket, HEADER_LEN};

/// Outer IPv4 header of the tunnel.
pub const OUTER_IP_BYTES: usize = 20;
/// UDP header carrying IKE.
pub const UDP_BYTES: usize = 8;
/// `mr_id || if_num` demultiplexing shim for tunnels whose own header does
/// not carry them (AH and the unauthenticated control).
pub const DEMUX_SHIM_BYTES: usize = 9;
/// Tunnel sequence number used by the receiver's reorder buffer; part of
/// the inner payload.
pub const TUNNEL_SEQ_BYTES: usize = 4;

pub const MR_NAME: &str = "MR-1";
pub const HA_NAME: &[u8] = b"HA-1";
pub const HA_IP: Ipv4Addr = Ipv4Addr::new(192, 0, 2, 1);

/// Address of adapter `i` before (`generation` 0) and after a handover.
pub fn interface_ip(i: usize, generation: u8) -> Ipv4Addr {
    Ipv4Addr::new(10, i as u8, generation, 2)
}

/// On-the-wire size of one tunnelled data packet carrying `app_bytes`.
pub fn data_wire_bytes(scheme: Scheme, app_bytes: usize) -> usize {
    let inner = TUNNEL_SEQ_BYTES + app_bytes;
    match scheme {
        Scheme::Nimsa => OUTER_IP_BYTES + HEADER_LEN + inner,
        Scheme::Ikev2 => OUTER_IP_BYTES + DEMUX_SHIM_BYTES + crate::ike::AH_OVERHEAD_BYTES + inner,
        Scheme::None => OUTER_IP_BYTES + DEMUX_SHIM_BYTES + inner,
    }
}

pub fn notification_wire_bytes() -> usize {
    OUTER_IP_BYTES + HEADER_LEN
}

pub fn ike_wire_bytes(msg: &IkeMessage) -> usize {
    OUTER_IP_BYTES + UDP_BYTES + msg.size_bytes as usize
}

/// Runs every trial of `scenario` with RNG streams derived from `seed`.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<MetricsReport, SimError> {
    scenario.validate()?;
    let template = Template::build(scenario, seed)?;
    let trials: Vec<TrialResult> = (0..scenario.trials)
        .into_par_iter()
        .map(|t| Trial::new(scenario, &template, t, seed).and_then(Trial::run))
        .collect::<Result<_, _>>()?;

    let mut report = MetricsReport::empty(scenario.scheme);
    report.trials = scenario.trials;
    for (t, r) in trials.into_iter().enumerate() {
        let t = t as u32;
        report.auth_latency_ms.push(r.auth.map(SimTime::as_millis_f64));
        report.handover_latency_ms.push(r.handover.map(SimTime::as_millis_f64));
        report.owd_ms.extend(r.owd.into_iter().map(|(probe_seq, d)| OwdSample {
            trial: t,
            probe_seq,
            owd_ms: d.as_millis_f64(),
        }));
        report.goodput_mbps.extend(r.goodput_bytes.iter().enumerate().map(|(bin, bytes)| GoodputSample {
            trial: t,
            time_s: bin as u64,
            goodput_mbps: *bytes as f64 * 8.0 / 1e6,
        }));
        for (k, v) in r.control {
            *report.control_msg_counts.entry(k).or_default() += v;
        }
        for (k, v) in r.drops {
            *report.drop_counts.entry(k.to_string()).or_default() += v;
        }
        report.packets.add(&r.packets);
    }
    Ok(report)
}

/// Per-run state shared (by clone) between trials: key material and SAs
/// that do not depend on the RNG.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // one per run, never moved in a hot loop
enum Template {
    Nimsa { mr: MrEndpoint, ha: HaEndpoint },
    Ike { session: IkeSession, responder: IkeResponder },
    None,
}

impl Template {
    fn build(sc: &Scenario, seed: u64) -> Result<Self, SimError> {
        Ok(match sc.scheme {
            Scheme::Nimsa => {
                let suite = setup(sc.security_level, Some(seed));
                let master = gen_master(&suite, &mut ChaCha20Rng::seed_from_u64(seed ^ 0x6d61_7374_6572));
                let mut mr = MrEndpoint::new(suite.clone(), MrId::from_name(MR_NAME), master, HA_NAME, HA_IP)?;
                let mut ha = HaEndpoint::new(suite, HA_NAME, HA_IP);
                ha.register_mr(mr.mr_id(), mr.registration_voucher())?;
                if sc.preestablished {
                    for i in 0..sc.links.len() {
                        mr.on_adapter_up(i as u8, interface_ip(i, 0))?;
                        let warm = mr.send(Vec::new(), i as u8)?;
                        let v = ha.on_packet(&warm);
                        debug_assert!(v.is_accepted());
                    }
                }
                Template::Nimsa { mr, ha }
            }
            Scheme::Ikev2 => {
                let mut session = IkeSession::new(sc.ike.clone(), interface_ip(0, 0))?;
                let mut responder = IkeResponder::new(sc.ike.clone());
                if sc.preestablished {
                    let mut actions = session.initiate(SimTime::ZERO)?;
                    while let Some(IkeAction::Send(m)) = actions.first().cloned() {
                        let reply = responder.on_message(&m).expect("requests are answered");
                        actions = session.on_message(&reply, SimTime::ZERO);
                    }
                    debug_assert_eq!(session.state(), IkeState::Established);
                }
                Template::Ike { session, responder }
            }
            Scheme::None => Template::None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct DataMeta {
    tunnel_seq: u64,
    app_bytes: usize,
    created: SimTime,
    probe_seq: Option<u64>,
}

enum Uplink {
    Nimsa(Box<NimsaPacket>, Option<DataMeta>),
    Ah(Box<AhPacket>, ImmutableIpFields, DataMeta, u8),
    Plain(DataMeta, u8, Ipv4Addr),
    Ike(IkeMessage),
}

enum Ev {
    Tick(u64),
    AdapterChange,
    MrService,
    UpArrive(Uplink),
    DownArrive(IkeMessage),
    HaIkeReply(IkeMessage),
    MrIke(IkeMessage),
    IkeTimer(u64),
    HaDeliver { meta: Option<DataMeta>, new_address: bool },
    ReorderTimer,
}

impl Ev {
    /// Same-time ordering: traffic first, then the scripted address change,
    /// then network events, and the router's send loop last so that data
    /// generated at an instant is still queued when the change is handled.
    fn priority(&self) -> u8 {
        match self {
            Ev::Tick(_) => 0,
            Ev::AdapterChange => 1,
            Ev::MrService => 3,
            _ => 2,
        }
    }

    fn on_link(&self) -> bool {
        matches!(self, Ev::UpArrive(_) | Ev::DownArrive(_))
    }
}

struct Queued {
    at: SimTime,
    prio: u8,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, o: &Self) -> Ordering {
        (o.at, o.prio, o.seq).cmp(&(self.at, self.prio, self.seq))
    }
}

#[allow(clippy::large_enum_variant)]
enum Proto {
    Nimsa { mr: MrEndpoint, ha: HaEndpoint },
    Ike { session: IkeSession, responder: IkeResponder, pending: VecDeque<Vec<u8>> },
    None { pending: VecDeque<Vec<u8>> },
}

#[derive(Debug, Default)]
struct TrialResult {
    auth: Option<SimTime>,
    handover: Option<SimTime>,
    owd: Vec<(u64, SimTime)>,
    goodput_bytes: Vec<u64>,
    control: BTreeMap<String, u64>,
    drops: BTreeMap<&'static str, u64>,
    packets: PacketCounts,
}

struct Trial<'a> {
    sc: &'a Scenario,
    rng: ChaCha8Rng,
    up: Vec<LinkState>,
    down: Vec<LinkState>,
    if_ips: Vec<Ipv4Addr>,
    queue: BinaryHeap<Queued>,
    seq: u64,
    mr_cpu: SimTime,
    ha_cpu: SimTime,
    proto: Proto,
    pending_meta: VecDeque<DataMeta>,
    next_tunnel_seq: u64,
    service_scheduled: bool,
    reorder: ReorderBuffer<DataMeta>,
    handover_at: Option<SimTime>,
    handover_started: bool,
    duration: SimTime,
    goodput_bins: BTreeMap<u64, u64>,
    reorder_timer: Option<SimTime>,
    out: TrialResult,
}

impl<'a> Trial<'a> {
    fn new(sc: &'a Scenario, template: &Template, trial: u32, seed: u64) -> Result<Self, SimError> {
        let links = sc.effective_links();
        let proto = match template.clone() {
            Template::Nimsa { mr, ha } => Proto::Nimsa { mr, ha },
            Template::Ike { session, responder } => Proto::Ike { session, responder, pending: VecDeque::new() },
            Template::None => Proto::None { pending: VecDeque::new() },
        };
        let mut t = Trial {
            sc,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(trial))),
            up: links.iter().copied().map(LinkState::new).collect(),
            down: links.iter().copied().map(LinkState::new).collect(),
            if_ips: (0..links.len()).map(|i| interface_ip(i, 0)).collect(),
            queue: BinaryHeap::new(),
            seq: 0,
            mr_cpu: SimTime::ZERO,
            ha_cpu: SimTime::ZERO,
            proto,
            pending_meta: VecDeque::new(),
            next_tunnel_seq: 0,
            service_scheduled: false,
            reorder: ReorderBuffer::new(SimTime::from_millis_f64(sc.reorder_window_ms)),
            handover_at: sc.handover_at_ms.map(SimTime::from_millis_f64),
            handover_started: false,
            duration: sc.traffic.duration(),
            goodput_bins: BTreeMap::new(),
            reorder_timer: None,
            out: TrialResult::default(),
        };
        t.start()?;
        Ok(t)
    }

    fn push(&mut self, at: SimTime, ev: Ev) {
        let prio = ev.priority();
        self.queue.push(Queued { at, prio, seq: self.seq, ev });
        self.seq += 1;
    }

    fn pairing(&self) -> SimTime {
        SimTime::from_millis_f64(self.sc.crypto_costs.pairing_ms)
    }

    fn hmac(&self) -> SimTime {
        SimTime::from_millis_f64(self.sc.crypto_costs.hmac_ms)
    }

    fn ike_processing(&self) -> SimTime {
        SimTime::from_millis_f64(self.sc.ike.processing_ms)
    }

    fn start(&mut self) -> Result<(), SimError> {
        // Adapters come up at t = 0 and derive their keys before sending.
        if !self.sc.preestablished {
            if let Proto::Nimsa { mr, .. } = &mut self.proto {
                for i in 0..self.if_ips.len() {
                    mr.on_adapter_up(i as u8, self.if_ips[i])?;
                }
                let cost = self.pairing();
                for _ in 0..self.if_ips.len() {
                    self.mr_cpu += cost;
                }
            }
        }
        if self.sc.traffic.kind != TrafficKind::None {
            self.push(SimTime::ZERO, Ev::Tick(0));
        }
        if let Some(h) = self.handover_at {
            self.push(h, Ev::AdapterChange);
        }
        Ok(())
    }

    fn tick_time(&self, k: u64) -> SimTime {
        let t = &self.sc.traffic;
        match t.kind {
            TrafficKind::Cbr => {
                SimTime::from_micros((k as f64 * cbr_spacing_us(t.rate_bps, t.packet_bytes)).round() as u64)
            }
            TrafficKind::Probe => SimTime::from_micros(k * SimTime::from_millis_f64(t.probe_interval_ms).as_micros()),
            TrafficKind::None => SimTime::ZERO,
        }
    }

    /// Notification-mode handovers happen while the router is idle.
    fn in_quiet_window(&self, now: SimTime) -> bool {
        match (self.sc.handover_mode, self.handover_at) {
            (HandoverMode::Notification, Some(h)) => {
                now >= h && now < h + SimTime::from_millis_f64(self.sc.idle_resume_ms)
            }
            _ => false,
        }
    }

    fn stop_condition_met(&self) -> bool {
        match self.sc.stop_on {
            StopOn::Drain => false,
            StopOn::Auth => self.out.auth.is_some(),
            StopOn::Handover => self.out.handover.is_some(),
        }
    }

    fn run(mut self) -> Result<TrialResult, SimError> {
        let horizon = self.duration + self.handover_at.unwrap_or(SimTime::ZERO) + SimTime::from_millis(300_000);
        while !self.stop_condition_met() {
            let Some(q) = self.queue.pop() else { break };
            if q.at > horizon {
                self.queue.push(q);
                break;
            }
            self.handle(q.at, q.ev)?;
        }
        self.out.packets.in_flight = self.queue.iter().filter(|q| q.ev.on_link()).count() as u64;
        if self.sc.traffic.kind == TrafficKind::Cbr {
            let bins = (self.sc.traffic.duration_s.ceil() as u64).max(1);
            self.out.goodput_bytes = (0..bins).map(|b| self.goodput_bins.get(&b).copied().unwrap_or(0)).collect();
        }
        Ok(self.out)
    }

    fn handle(&mut self, now: SimTime, ev: Ev) -> Result<(), SimError> {
        match ev {
            Ev::Tick(k) => self.on_tick(k, now),
            Ev::AdapterChange => self.on_adapter_change(now)?,
            Ev::MrService => {
                self.service_scheduled = false;
                self.mr_service(now)?;
            }
            Ev::UpArrive(item) => self.on_up_arrive(item, now),
            Ev::HaIkeReply(msg) => self.send_down(msg, now),
            Ev::DownArrive(msg) => {
                self.out.packets.delivered += 1;
                let done = now.max(self.mr_cpu) + self.ike_processing();
                self.mr_cpu = done;
                self.push(done, Ev::MrIke(msg));
            }
            Ev::MrIke(msg) => {
                let actions = match &mut self.proto {
                    Proto::Ike { session, .. } => session.on_message(&msg, now),
                    _ => Vec::new(),
                };
                self.apply_ike(actions, now)?;
            }
            Ev::IkeTimer(generation) => {
                let actions = match &mut self.proto {
                    Proto::Ike { session, .. } => session.on_timeout(generation, now),
                    _ => Vec::new(),
                };
                self.apply_ike(actions, now)?;
            }
            Ev::HaDeliver { meta, new_address } => self.on_deliver(meta, new_address, now),
            Ev::ReorderTimer => {
                if self.reorder_timer == Some(now) {
                    self.reorder_timer = None;
                }
                let released = self.reorder.expire(now);
                self.account_release(released, now);
                self.arm_reorder_timer(now);
            }
        }
        Ok(())
    }

    fn on_tick(&mut self, k: u64, now: SimTime) {
        let next = self.tick_time(k + 1);
        let more = match self.sc.traffic.kind {
            TrafficKind::Probe => {
                let count = (self.sc.traffic.duration_s * 1e3 / self.sc.traffic.probe_interval_ms).ceil() as u64;
                k + 1 < count
            }
            _ => next < self.duration,
        };
        if more {
            self.push(next, Ev::Tick(k + 1));
        }
        if self.in_quiet_window(now) {
            return;
        }
        let app_bytes = self.sc.traffic.packet_bytes as usize;
        let meta = DataMeta {
            tunnel_seq: self.next_tunnel_seq,
            app_bytes,
            created: now,
            probe_seq: (self.sc.traffic.kind == TrafficKind::Probe).then_some(k),
        };
        self.next_tunnel_seq += 1;
        let mut payload = Vec::with_capacity(TUNNEL_SEQ_BYTES + app_bytes);
        payload.extend_from_slice(&(meta.tunnel_seq as u32).to_be_bytes());
        payload.resize(TUNNEL_SEQ_BYTES + app_bytes, 0);
        match &mut self.proto {
            Proto::Nimsa { mr, .. } => mr.enqueue(payload),
            Proto::Ike { pending, .. } | Proto::None { pending } => pending.push_back(payload),
        }
        self.pending_meta.push_back(meta);
        if !self.service_scheduled {
            self.service_scheduled = true;
            self.push(now, Ev::MrService);
        }
    }

    fn on_adapter_change(&mut self, now: SimTime) -> Result<(), SimError> {
        self.handover_started = true;
        let new_ip = interface_ip(0, 1);
        self.if_ips[0] = new_ip;
        let pairing = self.pairing();
        let hmac = self.hmac();
        match &mut self.proto {
            Proto::Nimsa { mr, .. } => {
                self.mr_cpu = now.max(self.mr_cpu) + pairing;
                if let Some(note) = mr.on_adapter_change(0, new_ip)? {
                    self.mr_cpu += hmac;
                    let at = self.mr_cpu;
                    self.count_control("nimsa_notification");
                    self.send_up(0, notification_wire_bytes(), at, Uplink::Nimsa(Box::new(note), None));
                }
            }
            Proto::Ike { session, .. } => {
                let actions = session.mobike_handover(new_ip, now);
                self.apply_ike(actions, now)?;
            }
            Proto::None { .. } => {}
        }
        Ok(())
    }

    fn count_control(&mut self, kind: &str) {
        let phase = if self.handover_started { "handover" } else { "establishment" };
        *self.out.control.entry(phase.to_string()).or_default() += 1;
        *self.out.control.entry(kind.to_string()).or_default() += 1;
    }

    fn send_up(&mut self, link: usize, size: usize, at: SimTime, item: Uplink) {
        self.out.packets.sent += 1;
        match self.up[link].transmit(size, at, &mut self.rng) {
            Some(arrival) => self.push(arrival, Ev::UpArrive(item)),
            None => self.out.packets.lost += 1,
        }
    }

    fn send_down(&mut self, msg: IkeMessage, now: SimTime) {
        self.count_control(ike_kind_name(msg.kind));
        self.out.packets.sent += 1;
        match self.down[0].transmit(ike_wire_bytes(&msg), now, &mut self.rng) {
            Some(arrival) => self.push(arrival, Ev::DownArrive(msg)),
            None => self.out.packets.lost += 1,
        }
    }

    fn apply_ike(&mut self, actions: Vec<IkeAction>, now: SimTime) -> Result<(), SimError> {
        for a in actions {
            match a {
                IkeAction::Send(msg) => {
                    self.count_control(ike_kind_name(msg.kind));
                    self.send_up(0, ike_wire_bytes(&msg), now, Uplink::Ike(msg));
                }
                IkeAction::ArmTimer { at, generation } => self.push(at, Ev::IkeTimer(generation)),
                IkeAction::Established { at } => {
                    if self.out.auth.is_none() && !self.sc.preestablished {
                        self.out.auth = Some(at);
                    }
                    self.note_handover_done(at);
                    self.schedule_service(now);
                }
                IkeAction::HandoverComplete { at, .. } => {
                    self.note_handover_done(at);
                    self.schedule_service(now);
                }
                IkeAction::Failed { .. } => {
                    // Start over from scratch.
                    let retry = match &mut self.proto {
                        Proto::Ike { session, .. } => session.initiate(now)?,
                        _ => Vec::new(),
                    };
                    self.apply_ike(retry, now)?;
                }
            }
        }
        Ok(())
    }

    fn note_handover_done(&mut self, at: SimTime) {
        if let (true, None, Some(h)) = (self.handover_started, self.out.handover, self.handover_at) {
            self.out.handover = Some(at.saturating_sub(h));
        }
    }

    fn schedule_service(&mut self, now: SimTime) {
        if !self.service_scheduled && !self.pending_meta.is_empty() {
            self.service_scheduled = true;
            self.push(now, Ev::MrService);
        }
    }

    fn mr_service(&mut self, now: SimTime) -> Result<(), SimError> {
        let hmac = self.hmac();
        let scheme = self.sc.scheme;
        if let Proto::Ike { session, .. } = &mut self.proto {
            if !session.can_send_data() {
                if session.state() == IkeState::Idle {
                    let actions = session.initiate(now)?;
                    self.apply_ike(actions, now)?;
                }
                return Ok(());
            }
        }
        let candidates: Vec<usize> = match &self.proto {
            Proto::Nimsa { mr, .. } => mr.interfaces().map(|s| usize::from(s.if_num)).collect(),
            _ => (0..self.up.len()).collect(),
        };
        while let Some(meta) = self.pending_meta.front().copied() {
            let cost = if scheme == Scheme::None { SimTime::ZERO } else { hmac };
            let at = now.max(self.mr_cpu) + cost;
            let size = data_wire_bytes(scheme, meta.app_bytes);
            let Some(link) = edpf_pick_among(&self.up, candidates.iter().copied(), size, at) else {
                return Ok(());
            };
            self.mr_cpu = at;
            self.pending_meta.pop_front();
            let src = self.if_ips[link];
            let item = match &mut self.proto {
                Proto::Nimsa { mr, .. } => {
                    let pkt = mr.send_next(link as u8)?.expect("payload queued with its metadata");
                    Uplink::Nimsa(Box::new(pkt), Some(meta))
                }
                Proto::Ike { session, pending, .. } => {
                    let payload = pending.pop_front().expect("payload queued with its metadata");
                    let ip = ImmutableIpFields { src_ip: src, dst_ip: HA_IP, payload_length: payload.len() as u16 };
                    let pkt = session.protect(&ip, &payload)?;
                    Uplink::Ah(Box::new(pkt), ip, meta, link as u8)
                }
                Proto::None { pending } => {
                    pending.pop_front();
                    Uplink::Plain(meta, link as u8, src)
                }
            };
            self.send_up(link, size, at, item);
        }
        Ok(())
    }

    fn on_up_arrive(&mut self, item: Uplink, now: SimTime) {
        let hmac = self.hmac();
        let pairing = self.pairing();
        let handover_ip = self.handover_started.then(|| interface_ip(0, 1));
        match item {
            Uplink::Nimsa(pkt, meta) => {
                let Proto::Nimsa { ha, .. } = &mut self.proto else { unreachable!() };
                let before = ha.pairings_computed();
                let verdict = ha.on_packet(&pkt);
                let pairings = ha.pairings_computed() - before;
                let mut done = now.max(self.ha_cpu) + hmac;
                for _ in 0..pairings {
                    done += pairing;
                }
                self.ha_cpu = done;
                if verdict.is_accepted() {
                    self.out.packets.delivered += 1;
                    let new_address = pkt.header.if_num == 0 && Some(pkt.ip.src_ip) == handover_ip;
                    self.push(done, Ev::HaDeliver { meta, new_address });
                } else {
                    self.out.packets.dropped += 1;
                    *self.out.drops.entry(verdict.as_str()).or_default() += 1;
                }
            }
            Uplink::Ah(pkt, ip, meta, if_num) => {
                let Proto::Ike { responder, .. } = &self.proto else { unreachable!() };
                let ok = responder.verify(&pkt, &ip);
                let done = now.max(self.ha_cpu) + hmac;
                self.ha_cpu = done;
                if ok {
                    self.out.packets.delivered += 1;
                    let new_address = if_num == 0 && Some(ip.src_ip) == handover_ip;
                    self.push(done, Ev::HaDeliver { meta: Some(meta), new_address });
                } else {
                    self.out.packets.dropped += 1;
                    *self.out.drops.entry("drop_auth_fail").or_default() += 1;
                }
            }
            Uplink::Plain(meta, if_num, src) => {
                self.out.packets.delivered += 1;
                let new_address = if_num == 0 && Some(src) == handover_ip;
                self.push(now, Ev::HaDeliver { meta: Some(meta), new_address });
            }
            Uplink::Ike(msg) => {
                self.out.packets.delivered += 1;
                let done = now.max(self.ha_cpu) + self.ike_processing();
                self.ha_cpu = done;
                let Proto::Ike { responder, .. } = &mut self.proto else { unreachable!() };
                if let Some(reply) = responder.on_message(&msg) {
                    self.push(done, Ev::HaIkeReply(reply));
                }
            }
        }
    }

    fn on_deliver(&mut self, meta: Option<DataMeta>, new_address: bool, now: SimTime) {
        if self.out.auth.is_none() && !self.sc.preestablished && self.sc.scheme != Scheme::Ikev2 {
            self.out.auth = Some(now);
        }
        if new_address && self.sc.scheme != Scheme::Ikev2 {
            self.note_handover_done(now);
        }
        let Some(meta) = meta else { return };
        if let Some(probe) = meta.probe_seq {
            self.out.owd.push((probe, now.saturating_sub(meta.created)));
        }
        let released = self.reorder.push(meta.tunnel_seq, meta, now);
        self.account_release(released, now);
        self.arm_reorder_timer(now);
    }

    fn arm_reorder_timer(&mut self, now: SimTime) {
        if let Some(deadline) = self.reorder.next_deadline() {
            let deadline = deadline.max(now);
            if self.reorder_timer.is_none_or(|t| deadline < t) {
                self.reorder_timer = Some(deadline);
                self.push(deadline, Ev::ReorderTimer);
            }
        }
    }

    fn account_release(&mut self, released: Vec<(u64, DataMeta)>, now: SimTime) {
        let bin = now.as_micros() / 1_000_000;
        for (_, m) in released {
            *self.goodput_bins.entry(bin).or_default() += m.app_bytes as u64;
        }
    }
}

pub fn ike_kind_name(kind: IkeMsgKind) -> &'static str {
    match kind {
        IkeMsgKind::InitReq => "ike_sa_init_req",
        IkeMsgKind::InitResp => "ike_sa_init_resp",
        IkeMsgKind::AuthReq => "ike_auth_req",
        IkeMsgKind::AuthResp => "ike_auth_resp",
        IkeMsgKind::UpdateReq => "update_sa_addresses_req",
        IkeMsgKind::UpdateResp => "update_sa_addresses_resp",
        IkeMsgKind::RekeyReq => "rekey_req",
        IkeMsgKind::RekeyResp => "rekey_resp",
    }
}
