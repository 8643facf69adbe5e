use serde::Serialize;

use super::{CsvRow, HarnessError};
use crate::simnet::{
    metrics::mean, run_scenario, HandoverMode, LinkProfile, Scenario, Scheme, StopOn, TrafficConfig, TrafficKind,
};

/// Parses `start:end:step` (inclusive of `end` when it lies on the grid).
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Config(format!("sweep {spec:?} must look like start:end:step"));
    let parts: Vec<f64> =
        spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && a <= b && a >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as u64;
    if n > 10_000 {
        return Err(HarnessError::Config("sweep has too many points".into()));
    }
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

/// Parses rates such as `10mbps`, `10m`, `500kbps` or a plain number of bit/s.
pub fn parse_rate_bps(spec: &str) -> Result<f64, HarnessError> {
    let s = spec.trim().to_ascii_lowercase();
    let s = s.strip_suffix("bps").unwrap_or(&s);
    let (num, mult) = match s.chars().last() {
        Some('g') => (&s[..s.len() - 1], 1e9),
        Some('m') => (&s[..s.len() - 1], 1e6),
        Some('k') => (&s[..s.len() - 1], 1e3),
        _ => (s, 1.0),
    };
    match num.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v * mult),
        _ => Err(HarnessError::Config(format!("cannot parse rate {spec:?}"))),
    }
}

fn cbr(rate_bps: f64, packet_bytes: u32, duration_s: f64) -> TrafficConfig {
    TrafficConfig { kind: TrafficKind::Cbr, rate_bps, packet_bytes, duration_s, ..TrafficConfig::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthRow {
    pub scheme: Scheme,
    pub loss_pct: f64,
    pub one_way_delay_ms: f64,
    pub trial: u32,
    pub auth_latency_ms: Option<f64>,
}

impl CsvRow for AuthRow {
    const HEADER: &'static [&'static str] = &["scheme", "loss_pct", "one_way_delay_ms", "trial", "auth_latency_ms"];
}

#[derive(Debug, Clone)]
pub struct AuthBenchParams {
    pub losses_pct: Vec<f64>,
    pub delays_ms: Vec<f64>,
    pub trials: u32,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    /// Link bandwidth, costs and IKE timers come from here; loss and delay
    /// are overridden per grid point.
    pub base: Scenario,
}

impl Default for AuthBenchParams {
    fn default() -> Self {
        AuthBenchParams {
            losses_pct: vec![0.0, 5.0, 10.0, 15.0],
            delays_ms: parse_sweep("10:100:10").expect("static sweep"),
            trials: 100,
            schemes: vec![Scheme::Nimsa, Scheme::Ikev2],
            seed: 1,
            base: Scenario {
                links: vec![LinkProfile::table1()[0]],
                traffic: cbr(1e6, 1250, 120.0),
                ..Scenario::default()
            },
        }
    }
}

/// Time from the first data need until data can flow authenticated, per
/// `(scheme, loss, delay, trial)`. Every scheme sees the same seeds.
pub fn auth_bench(p: &AuthBenchParams) -> Result<Vec<AuthRow>, HarnessError> {
    let mut rows = Vec::new();
    for &scheme in &p.schemes {
        for &loss in &p.losses_pct {
            for &delay in &p.delays_ms {
                let sc = Scenario {
                    scheme,
                    loss_override_pct: Some(loss),
                    delay_override_ms: Some(delay),
                    trials: p.trials,
                    seed: p.seed,
                    preestablished: false,
                    handover_at_ms: None,
                    stop_on: StopOn::Auth,
                    ..p.base.clone()
                };
                let r = run_scenario(&sc, p.seed)?;
                rows.extend(r.auth_latency_ms.iter().enumerate().map(|(t, v)| AuthRow {
                    scheme,
                    loss_pct: loss,
                    one_way_delay_ms: delay,
                    trial: t as u32,
                    auth_latency_ms: *v,
                }));
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandoverRow {
    pub scheme: Scheme,
    /// `transmission`, `notification` or `mobike`.
    pub mode: &'static str,
    pub loss_pct: f64,
    pub trial: u32,
    pub handover_latency_ms: Option<f64>,
}

impl CsvRow for HandoverRow {
    const HEADER: &'static [&'static str] = &["scheme", "mode", "loss_pct", "trial", "handover_latency_ms"];
}

#[derive(Debug, Clone)]
pub struct HandoverBenchParams {
    pub modes: Vec<HandoverMode>,
    pub include_mobike: bool,
    pub losses_pct: Vec<f64>,
    pub delay_ms: f64,
    pub trials: u32,
    pub seed: u64,
    pub handover_at_ms: f64,
    pub base: Scenario,
}

impl Default for HandoverBenchParams {
    fn default() -> Self {
        HandoverBenchParams {
            modes: vec![HandoverMode::Transmission, HandoverMode::Notification],
            include_mobike: true,
            losses_pct: vec![0.0, 5.0, 10.0, 15.0],
            delay_ms: 50.0,
            trials: 100,
            seed: 1,
            handover_at_ms: 1000.0,
            base: Scenario {
                links: vec![LinkProfile::table1()[0]],
                traffic: cbr(1e6, 1250, 120.0),
                ..Scenario::default()
            },
        }
    }
}

/// Latency from the address change until the home agent accepts traffic
/// from the new address (NIMSA) or the MOBIKE update and rekey finish.
pub fn handover_bench(p: &HandoverBenchParams) -> Result<Vec<HandoverRow>, HarnessError> {
    let mut runs: Vec<(Scheme, HandoverMode, &'static str)> =
        p.modes.iter().map(|&m| (Scheme::Nimsa, m, m.as_str())).collect();
    if p.include_mobike {
        runs.push((Scheme::Ikev2, HandoverMode::Transmission, "mobike"));
    }
    let mut rows = Vec::new();
    for (scheme, mode, label) in runs {
        for &loss in &p.losses_pct {
            let sc = Scenario {
                scheme,
                handover_mode: mode,
                loss_override_pct: Some(loss),
                delay_override_ms: Some(p.delay_ms),
                trials: p.trials,
                seed: p.seed,
                preestablished: true,
                handover_at_ms: Some(p.handover_at_ms),
                stop_on: StopOn::Handover,
                ..p.base.clone()
            };
            let r = run_scenario(&sc, p.seed)?;
            rows.extend(r.handover_latency_ms.iter().enumerate().map(|(t, v)| HandoverRow {
                scheme,
                mode: label,
                loss_pct: loss,
                trial: t as u32,
                handover_latency_ms: *v,
            }));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyRow {
    pub scheme: Scheme,
    pub probe_seq: u64,
    pub owd_ms: f64,
}

impl CsvRow for LatencyRow {
    const HEADER: &'static [&'static str] = &["scheme", "probe_seq", "owd_ms"];
}

#[derive(Debug, Clone)]
pub struct LatencyBenchParams {
    pub schemes: Vec<Scheme>,
    pub duration_s: f64,
    pub probe_interval_ms: f64,
    pub probe_bytes: u32,
    pub seed: u64,
    pub base: Scenario,
}

impl Default for LatencyBenchParams {
    fn default() -> Self {
        LatencyBenchParams {
            schemes: vec![Scheme::None, Scheme::Nimsa, Scheme::Ikev2],
            duration_s: 60.0,
            probe_interval_ms: 1000.0,
            probe_bytes: 64,
            seed: 1,
            base: Scenario::default(),
        }
    }
}

/// Probe one-way delays over pre-established tunnels; lost probes produce
/// no row.
pub fn latency_bench(p: &LatencyBenchParams) -> Result<Vec<LatencyRow>, HarnessError> {
    let mut rows = Vec::new();
    for &scheme in &p.schemes {
        let sc = Scenario {
            scheme,
            traffic: TrafficConfig {
                kind: TrafficKind::Probe,
                packet_bytes: p.probe_bytes,
                duration_s: p.duration_s,
                probe_interval_ms: p.probe_interval_ms,
                ..TrafficConfig::default()
            },
            trials: 1,
            seed: p.seed,
            preestablished: true,
            handover_at_ms: None,
            stop_on: StopOn::Drain,
            ..p.base.clone()
        };
        let r = run_scenario(&sc, p.seed)?;
        rows.extend(r.owd_ms.iter().map(|s| LatencyRow { scheme, probe_seq: s.probe_seq, owd_ms: s.owd_ms }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputRow {
    pub scheme: Scheme,
    pub time_s: u64,
    pub goodput_mbps: f64,
}

impl CsvRow for ThroughputRow {
    const HEADER: &'static [&'static str] = &["scheme", "time_s", "goodput_mbps"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputSummary {
    pub scheme: Scheme,
    pub offered_mbps: f64,
    pub mean_goodput_mbps: f64,
    pub efficiency: f64,
}

impl CsvRow for ThroughputSummary {
    const HEADER: &'static [&'static str] = &["scheme", "offered_mbps", "mean_goodput_mbps", "efficiency"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub rows: Vec<ThroughputRow>,
    pub summary: Vec<ThroughputSummary>,
}

#[derive(Debug, Clone)]
pub struct ThroughputBenchParams {
    pub schemes: Vec<Scheme>,
    pub offered_bps: f64,
    pub packet_bytes: u32,
    pub duration_s: f64,
    pub seed: u64,
    pub base: Scenario,
}

impl Default for ThroughputBenchParams {
    fn default() -> Self {
        ThroughputBenchParams {
            schemes: vec![Scheme::Nimsa, Scheme::Ikev2],
            offered_bps: 10e6,
            packet_bytes: 1250,
            duration_s: 30.0,
            seed: 1,
            base: Scenario::default(),
        }
    }
}

/// Goodput after the reorder buffer in one-second bins, plus the mean and
/// the aggregation efficiency (mean goodput over offered load).
pub fn throughput_bench(p: &ThroughputBenchParams) -> Result<ThroughputReport, HarnessError> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &scheme in &p.schemes {
        let sc = Scenario {
            scheme,
            traffic: cbr(p.offered_bps, p.packet_bytes, p.duration_s),
            trials: 1,
            seed: p.seed,
            preestablished: true,
            handover_at_ms: None,
            stop_on: StopOn::Drain,
            ..p.base.clone()
        };
        let r = run_scenario(&sc, p.seed)?;
        let bins: Vec<ThroughputRow> = r
            .goodput_mbps
            .iter()
            .map(|g| ThroughputRow { scheme, time_s: g.time_s, goodput_mbps: g.goodput_mbps })
            .collect();
        let m = mean(bins.iter().map(|b| b.goodput_mbps)).unwrap_or(0.0);
        let offered = p.offered_bps / 1e6;
        summary.push(ThroughputSummary {
            scheme,
            offered_mbps: offered,
            mean_goodput_mbps: m,
            efficiency: m / offered,
        });
        rows.extend(bins);
    }
    Ok(ThroughputReport { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        let s = parse_sweep("10:100:10").unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!((s[0], s[9]), (10.0, 100.0));
        assert_eq!(parse_sweep("5:5:1").unwrap(), vec![5.0]);
        assert_eq!(parse_sweep("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for bad in ["10:100", "a:b:c", "10:5:1", "1:2:0", "1:2:-1"] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rates() {
        assert_eq!(parse_rate_bps("10mbps").unwrap(), 10e6);
        assert_eq!(parse_rate_bps("10M").unwrap(), 10e6);
        assert_eq!(parse_rate_bps("500kbps").unwrap(), 5e5);
        assert_eq!(parse_rate_bps("2500000").unwrap(), 2.5e6);
        assert!(parse_rate_bps("fast").is_err());
        assert!(parse_rate_bps("-1m").is_err());
    }

    #[test]
    fn small_auth_grid() {
        let p = AuthBenchParams {
            losses_pct: vec![0.0],
            delays_ms: vec![20.0],
            trials: 2,
            base: Scenario { security_level: crate::SecurityLevel::Test, ..AuthBenchParams::default().base },
            ..Default::default()
        };
        let rows = auth_bench(&p).unwrap();
        assert_eq!(rows.len(), 4);
        let nimsa = rows[0].auth_latency_ms.unwrap();
        let ike = rows[2].auth_latency_ms.unwrap();
        assert!((20.0..=30.0).contains(&nimsa), "{nimsa}");
        assert!(ike >= 80.0, "{ike}");
    }
}
