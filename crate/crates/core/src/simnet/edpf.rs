//! Earliest Delivery Path First.

use super::link::LinkState;
use crate::time::SimTime;

/// `max(now, busy_until) + serialization + delay midpoint`.
pub fn estimated_delivery(link: &LinkState, size_bytes: usize, now: SimTime) -> SimTime {
    now.max(link.busy_until()) + link.profile.serialization(size_bytes) + link.profile.delay_midpoint()
}

/// Index of the link with the earliest estimated delivery; ties go to the
/// lowest index. `None` only for an empty candidate set.
pub fn edpf_pick(links: &[LinkState], size_bytes: usize, now: SimTime) -> Option<usize> {
    edpf_pick_among(links, 0..links.len(), size_bytes, now)
}

/// Same as [`edpf_pick`] restricted to `candidates` (for example the
/// interfaces that currently hold keys).
pub fn edpf_pick_among(
    links: &[LinkState],
    candidates: impl IntoIterator<Item = usize>,
    size_bytes: usize,
    now: SimTime,
) -> Option<usize> {
    let mut best: Option<(SimTime, usize)> = None;
    for i in candidates {
        let t = estimated_delivery(&links[i], size_bytes, now);
        if best.is_none_or(|(bt, bi)| t < bt || (t == bt && i < bi)) {
            best = Some((t, i));
        }
    }
    best.map(|(_, i)| i)
}
