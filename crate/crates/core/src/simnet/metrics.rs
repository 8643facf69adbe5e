use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scenario::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwdSample {
    pub trial: u32,
    pub probe_seq: u64,
    pub owd_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodputSample {
    pub trial: u32,
    /// Start of the one-second bin.
    pub time_s: u64,
    pub goodput_mbps: f64,
}

/// Every packet put on a link ends up in exactly one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PacketCounts {
    pub sent: u64,
    pub delivered: u64,
    pub lost: u64,
    pub dropped: u64,
    /// Still on a link when the trial stopped early.
    pub in_flight: u64,
}

impl PacketCounts {
    pub fn reconciles(&self) -> bool {
        self.sent == self.delivered + self.lost + self.dropped + self.in_flight
    }

    pub fn add(&mut self, o: &PacketCounts) {
        self.sent += o.sent;
        self.delivered += o.delivered;
        self.lost += o.lost;
        self.dropped += o.dropped;
        self.in_flight += o.in_flight;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub trials: u32,
    /// One entry per trial; `None` if the trial never authenticated.
    pub auth_latency_ms: Vec<Option<f64>>,
    pub handover_latency_ms: Vec<Option<f64>>,
    pub owd_ms: Vec<OwdSample>,
    pub goodput_mbps: Vec<GoodputSample>,
    /// Control transmissions, keyed `establishment` / `handover` and by
    /// message type, summed over trials.
    pub control_msg_counts: BTreeMap<String, u64>,
    /// Receiver drops keyed by verdict.
    pub drop_counts: BTreeMap<String, u64>,
    pub packets: PacketCounts,
}

impl MetricsReport {
    pub fn empty(scheme: Scheme) -> Self {
        MetricsReport {
            scheme,
            trials: 0,
            auth_latency_ms: Vec::new(),
            handover_latency_ms: Vec::new(),
            owd_ms: Vec::new(),
            goodput_mbps: Vec::new(),
            control_msg_counts: BTreeMap::new(),
            drop_counts: BTreeMap::new(),
            packets: PacketCounts::default(),
        }
    }

    pub fn control(&self, key: &str) -> u64 {
        self.control_msg_counts.get(key).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    /// Mean over trials that produced a value.
    pub fn mean_auth_latency_ms(&self) -> Option<f64> {
        mean(self.auth_latency_ms.iter().flatten().copied())
    }

    pub fn mean_handover_latency_ms(&self) -> Option<f64> {
        mean(self.handover_latency_ms.iter().flatten().copied())
    }

    pub fn mean_owd_ms(&self) -> Option<f64> {
        mean(self.owd_ms.iter().map(|s| s.owd_ms))
    }

    pub fn mean_goodput_mbps(&self) -> Option<f64> {
        mean(self.goodput_mbps.iter().map(|s| s.goodput_mbps))
    }
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn means_skip_missing() {
        let mut r = MetricsReport::empty(Scheme::Nimsa);
        r.auth_latency_ms = vec![Some(1.0), None, Some(3.0)];
        assert_eq!(r.mean_auth_latency_ms(), Some(2.0));
        assert_eq!(r.mean_handover_latency_ms(), None);
        assert_eq!(mean([]), None);
    }

    #[test]
    fn reconciliation() {
        let c = PacketCounts { sent: 10, delivered: 6, lost: 2, dropped: 1, in_flight: 1 };
        assert!(c.reconciles());
        assert!(!PacketCounts { sent: 1, ..Default::default() }.reconciles());
    }
}
