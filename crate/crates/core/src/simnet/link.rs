use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::time::SimTime;

/// Static description of one access link. Serialized with the flat key names
/// used in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkProfile {
    pub loss_min: f64,
    pub loss_max: f64,
    pub bandwidth_bps: f64,
    pub delay_min_ms: f64,
    pub delay_max_ms: f64,
}

impl LinkProfile {
    /// The three heterogeneous links used by the latency and throughput
    /// experiments.
    pub fn table1() -> Vec<LinkProfile> {
        vec![
            LinkProfile { loss_min: 0.015, loss_max: 0.02, bandwidth_bps: 4e6, delay_min_ms: 40.0, delay_max_ms: 50.0 },
            LinkProfile { loss_min: 0.02, loss_max: 0.025, bandwidth_bps: 4e6, delay_min_ms: 60.0, delay_max_ms: 70.0 },
            LinkProfile { loss_min: 0.01, loss_max: 0.015, bandwidth_bps: 4e6, delay_min_ms: 50.0, delay_max_ms: 60.0 },
        ]
    }

    pub fn fixed(loss: f64, bandwidth_bps: f64, delay_ms: f64) -> Self {
        LinkProfile { loss_min: loss, loss_max: loss, bandwidth_bps, delay_min_ms: delay_ms, delay_max_ms: delay_ms }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok_loss = |p: f64| (0.0..=1.0).contains(&p);
        if !(ok_loss(self.loss_min) && ok_loss(self.loss_max) && self.loss_min <= self.loss_max) {
            return Err(SimError::Config(format!("link loss range [{}, {}] invalid", self.loss_min, self.loss_max)));
        }
        if !(self.bandwidth_bps > 0.0 && self.bandwidth_bps.is_finite()) {
            return Err(SimError::Config("link bandwidth must be positive".into()));
        }
        if !(self.delay_min_ms >= 0.0 && self.delay_min_ms <= self.delay_max_ms && self.delay_max_ms.is_finite()) {
            return Err(SimError::Config(format!(
                "link delay range [{}, {}] invalid",
                self.delay_min_ms, self.delay_max_ms
            )));
        }
        Ok(())
    }

    /// Time to clock `size_bytes` onto the wire, rounded to the microsecond.
    pub fn serialization(&self, size_bytes: usize) -> SimTime {
        SimTime::from_micros((size_bytes as f64 * 8.0 * 1e6 / self.bandwidth_bps).round() as u64)
    }

    pub fn delay_midpoint(&self) -> SimTime {
        SimTime::from_millis_f64((self.delay_min_ms + self.delay_max_ms) / 2.0)
    }
}

/// A link in one direction: the profile plus the tail of its FIFO
/// serialization queue.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub profile: LinkProfile,
    busy_until: SimTime,
}

impl LinkState {
    pub fn new(profile: LinkProfile) -> Self {
        LinkState { profile, busy_until: SimTime::ZERO }
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }

    /// Moves the queue tail forward; never backwards.
    pub fn occupy_until(&mut self, t: SimTime) {
        self.busy_until = self.busy_until.max(t);
    }

    /// Queues one packet. Exactly three uniforms are drawn per call whatever
    /// the outcome, so runs that transmit the same number of packets consume
    /// identical random streams.
    pub fn transmit<R: Rng + ?Sized>(&mut self, size_bytes: usize, now: SimTime, rng: &mut R) -> Option<SimTime> {
        debug_assert!(size_bytes > 0);
        let u_rate: f64 = rng.gen();
        let u_loss: f64 = rng.gen();
        let u_delay: f64 = rng.gen();
        let start = now.max(self.busy_until);
        self.busy_until = start + self.profile.serialization(size_bytes);
        let p = self.profile.loss_min + u_rate * (self.profile.loss_max - self.profile.loss_min);
        if u_loss < p {
            return None;
        }
        let delay = self.profile.delay_min_ms + u_delay * (self.profile.delay_max_ms - self.profile.delay_min_ms);
        Some(self.busy_until + SimTime::from_millis_f64(delay))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn idle_link_arrival() {
        let mut l = LinkState::new(LinkProfile::fixed(0.0, 4e6, 50.0));
        let now = SimTime::from_millis(7);
        assert_eq!(l.transmit(1250, now, &mut rng()), Some(SimTime::from_micros(7_000 + 2_500 + 50_000)));
        assert_eq!(l.busy_until(), SimTime::from_micros(9_500));
    }

    #[test]
    fn certain_loss() {
        let mut l = LinkState::new(LinkProfile::fixed(1.0, 4e6, 50.0));
        let mut r = rng();
        assert!((0..100).all(|_| l.transmit(100, SimTime::ZERO, &mut r).is_none()));
        // Lost packets still occupied the wire.
        assert_eq!(l.busy_until(), SimTime::from_micros(100 * 200));
    }

    #[test]
    fn back_to_back_packets_queue() {
        let mut l = LinkState::new(LinkProfile::fixed(0.0, 4e6, 50.0));
        let mut r = rng();
        let a = l.transmit(1250, SimTime::ZERO, &mut r).unwrap();
        let b = l.transmit(1250, SimTime::ZERO, &mut r).unwrap();
        assert_eq!(b.saturating_sub(a), SimTime::from_micros(2_500));
    }

    #[test]
    fn sampled_values_stay_in_range() {
        let p =
            LinkProfile { loss_min: 0.1, loss_max: 0.3, bandwidth_bps: 1e9, delay_min_ms: 40.0, delay_max_ms: 50.0 };
        let mut l = LinkState::new(p);
        let mut r = rng();
        let mut lost = 0;
        for i in 0..20_000u64 {
            let now = SimTime::from_millis(i);
            match l.transmit(100, now, &mut r) {
                None => lost += 1,
                Some(t) => {
                    let d = t.saturating_sub(now).as_micros();
                    assert!((40_000..=50_001).contains(&d), "{d}");
                }
            }
        }
        // Mean loss 0.2; 20000 draws put 3 sigma at about 0.0085.
        let rate = lost as f64 / 20_000.0;
        assert!((rate - 0.2).abs() < 0.0085, "{rate}");
    }

    #[test]
    fn validation() {
        assert!(LinkProfile::table1().iter().all(|p| p.validate().is_ok()));
        assert!(LinkProfile::fixed(1.5, 1e6, 1.0).validate().is_err());
        assert!(LinkProfile::fixed(0.1, 0.0, 1.0).validate().is_err());
        let mut p = LinkProfile::fixed(0.1, 1e6, 1.0);
        p.delay_min_ms = 2.0;
        assert!(p.validate().is_err());
        p.loss_min = 0.2;
        assert!(p.validate().is_err());
    }
}
