//! Deterministic traffic schedules. Tick times are computed from the index
//! rather than accumulated, so long runs do not drift.

use crate::time::SimTime;

/// `count` probes spaced `interval` apart, starting at zero.
pub fn probe_generator(interval: SimTime, count: u64) -> impl Iterator<Item = SimTime> {
    (0..count).map(move |k| SimTime::from_micros(k * interval.as_micros()))
}

/// Spacing between CBR packets in microseconds (fractional).
pub fn cbr_spacing_us(rate_bps: f64, packet_bytes: u32) -> f64 {
    f64::from(packet_bytes) * 8.0 * 1e6 / rate_bps
}

/// Constant-bit-rate send times in `[0, duration)`.
pub fn cbr_generator(rate_bps: f64, packet_bytes: u32, duration: SimTime) -> impl Iterator<Item = SimTime> {
    let spacing = cbr_spacing_us(rate_bps, packet_bytes);
    (0u64..).map(move |k| SimTime::from_micros((k as f64 * spacing).round() as u64)).take_while(move |t| *t < duration)
}
