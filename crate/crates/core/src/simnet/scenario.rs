use std::path::Path;

use serde::{Deserialize, Serialize};

use super::link::LinkProfile;
use super::SimError;
use crate::idnike::SecurityLevel;
use crate::ike::IkeConfig;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Nimsa,
    Ikev2,
    /// No authentication at all; the control row for data-path comparisons.
    None,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Nimsa => "nimsa",
            Scheme::Ikev2 => "ikev2",
            Scheme::None => "none",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "nimsa" => Ok(Scheme::Nimsa),
            "ikev2" => Ok(Scheme::Ikev2),
            "none" => Ok(Scheme::None),
            _ => Err(SimError::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HandoverMode {
    /// The next data packet carries the new address.
    #[default]
    Transmission,
    /// The router is idle and sends one unacknowledged update.
    Notification,
}

impl HandoverMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HandoverMode::Transmission => "transmission",
            HandoverMode::Notification => "notification",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TrafficKind {
    #[default]
    Cbr,
    Probe,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    #[serde(rename = "type")]
    pub kind: TrafficKind,
    pub rate_bps: f64,
    pub packet_bytes: u32,
    pub duration_s: f64,
    pub probe_interval_ms: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            kind: TrafficKind::Cbr,
            rate_bps: 1e6,
            packet_bytes: 1250,
            duration_s: 10.0,
            probe_interval_ms: 1000.0,
        }
    }
}

impl TrafficConfig {
    pub fn duration(&self) -> SimTime {
        SimTime::from_millis_f64(self.duration_s * 1e3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CryptoCosts {
    /// Charged once per pairing computed (interface start-up, handover).
    pub pairing_ms: f64,
    /// Charged per packet at both ends.
    pub hmac_ms: f64,
}

impl Default for CryptoCosts {
    fn default() -> Self {
        CryptoCosts { pairing_ms: 1.5, hmac_ms: 0.02 }
    }
}

/// When a trial may stop early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StopOn {
    /// Run until every event has been processed.
    #[default]
    Drain,
    /// Stop once the first authenticated data exchange is possible.
    Auth,
    /// Stop once the handover has completed.
    Handover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub links: Vec<LinkProfile>,
    pub scheme: Scheme,
    pub handover_mode: HandoverMode,
    pub traffic: TrafficConfig,
    pub loss_override_pct: Option<f64>,
    pub delay_override_ms: Option<f64>,
    pub trials: u32,
    pub seed: u64,
    pub ike: IkeConfig,
    pub crypto_costs: CryptoCosts,
    /// Moves interface 0 to a fresh address at this time.
    pub handover_at_ms: Option<f64>,
    /// Start with keys in place on both sides (no initial authentication).
    pub preestablished: bool,
    /// In notification mode the router stays idle for this long after the
    /// address change before traffic resumes.
    pub idle_resume_ms: f64,
    pub reorder_window_ms: f64,
    pub security_level: SecurityLevel,
    pub stop_on: StopOn,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            links: LinkProfile::table1(),
            scheme: Scheme::Nimsa,
            handover_mode: HandoverMode::Transmission,
            traffic: TrafficConfig::default(),
            loss_override_pct: None,
            delay_override_ms: None,
            trials: 1,
            seed: 1,
            ike: IkeConfig::default(),
            crypto_costs: CryptoCosts::default(),
            handover_at_ms: None,
            preestablished: false,
            idle_resume_ms: 200.0,
            reorder_window_ms: 100.0,
            security_level: SecurityLevel::Standard,
            stop_on: StopOn::Drain,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimError::Config(format!("scenario JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.links.is_empty() {
            return Err(SimError::Config("at least one link is required".into()));
        }
        if self.links.len() > 255 {
            return Err(SimError::Config("at most 255 links".into()));
        }
        for l in &self.links {
            l.validate()?;
        }
        if let Some(p) = self.loss_override_pct {
            if !(0.0..=100.0).contains(&p) {
                return Err(SimError::Config("loss_override_pct must be within [0, 100]".into()));
            }
        }
        if let Some(d) = self.delay_override_ms {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(SimError::Config("delay_override_ms must be non-negative".into()));
            }
        }
        if self.trials == 0 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        let t = &self.traffic;
        if t.kind != TrafficKind::None {
            if !(t.duration_s > 0.0 && t.duration_s.is_finite()) || t.packet_bytes == 0 {
                return Err(SimError::Config("traffic duration and packet size must be positive".into()));
            }
            if t.kind == TrafficKind::Cbr && !(t.rate_bps > 0.0 && t.rate_bps.is_finite()) {
                return Err(SimError::Config("traffic rate must be positive".into()));
            }
            if t.kind == TrafficKind::Probe && !(t.probe_interval_ms > 0.0 && t.probe_interval_ms.is_finite()) {
                return Err(SimError::Config("probe interval must be positive".into()));
            }
        }
        if t.packet_bytes > 60_000 {
            return Err(SimError::Config("packet_bytes must fit one datagram".into()));
        }
        if let Some(h) = self.handover_at_ms {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(SimError::Config("handover_at_ms must be non-negative".into()));
            }
        }
        let costs = &self.crypto_costs;
        if !(costs.pairing_ms >= 0.0 && costs.hmac_ms >= 0.0) {
            return Err(SimError::Config("crypto costs must be non-negative".into()));
        }
        if !(self.idle_resume_ms >= 0.0 && self.reorder_window_ms >= 0.0) {
            return Err(SimError::Config("idle_resume_ms and reorder_window_ms must be non-negative".into()));
        }
        self.ike.validate().map_err(|e| SimError::Config(e.to_string()))?;
        Ok(())
    }

    /// Link profiles after applying the loss and delay overrides.
    pub fn effective_links(&self) -> Vec<LinkProfile> {
        self.links
            .iter()
            .map(|l| {
                let mut l = *l;
                if let Some(p) = self.loss_override_pct {
                    l.loss_min = p / 100.0;
                    l.loss_max = p / 100.0;
                }
                if let Some(d) = self.delay_override_ms {
                    l.delay_min_ms = d;
                    l.delay_max_ms = d;
                }
                l
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_schema_round_trip() {
        let json = r#"{
            "links": [{"loss_min": 0.0, "loss_max": 0.01, "bandwidth_bps": 4e6, "delay_min_ms": 10, "delay_max_ms": 20}],
            "scheme": "ikev2",
            "handover_mode": "notification",
            "traffic": {"type": "probe", "rate_bps": 1e6, "packet_bytes": 64, "duration_s": 60, "probe_interval_ms": 1000},
            "loss_override_pct": 5,
            "delay_override_ms": 30,
            "trials": 3,
            "seed": 9,
            "ike": {"rto_initial_ms": 400},
            "crypto_costs": {"pairing_ms": 2.0, "hmac_ms": 0.01}
        }"#;
        let s = Scenario::from_json(json).unwrap();
        assert_eq!(s.scheme, Scheme::Ikev2);
        assert_eq!(s.handover_mode, HandoverMode::Notification);
        assert_eq!(s.traffic.kind, TrafficKind::Probe);
        assert_eq!(s.ike.rto_initial_ms, 400.0);
        assert_eq!(s.ike.auth_req_bytes, 1100);
        let eff = s.effective_links();
        assert_eq!((eff[0].loss_min, eff[0].loss_max, eff[0].delay_min_ms), (0.05, 0.05, 30.0));
        let back = Scenario::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(Scenario::from_json("{}").unwrap(), Scenario::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"links": []}"#,
            r#"{"trials": 0}"#,
            r#"{"scheme": "hip"}"#,
            r#"{"loss_override_pct": 120}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"traffic": {"rate_bps": 0}}"#,
            r#"{"ike": {"max_retries": 0}}"#,
            r#"{"links": [{"loss_min": 0.5, "loss_max": 0.1, "bandwidth_bps": 1e6, "delay_min_ms": 1, "delay_max_ms": 2}]}"#,
            "not json",
        ] {
            assert!(matches!(Scenario::from_json(bad), Err(SimError::Config(_))), "{bad}");
        }
    }
}
