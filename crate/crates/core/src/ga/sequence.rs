use rand::seq::SliceRandom;
use rand::Rng;

use crate::scenario::Scenario;

/// Ordered waypoint indices: the start first, the fixed end (if any) last,
/// every index at most once.
pub type WaypointSequence = Vec<usize>;

/// The freely chosen part of `seq`, without the fixed start and end.
pub fn intermediates<'s>(seq: &'s [usize], scenario: &Scenario) -> &'s [usize] {
    let lo = usize::from(!seq.is_empty());
    let hi = match scenario.end() {
        Some(_) if seq.len() >= 2 => seq.len() - 1,
        _ => seq.len(),
    };
    &seq[lo..hi.max(lo)]
}

/// Wraps intermediates with the fixed start and, when set, the fixed end.
pub fn with_endpoints(inner: &[usize], scenario: &Scenario) -> WaypointSequence {
    let mut seq = Vec::with_capacity(inner.len() + 2);
    seq.push(Scenario::START);
    seq.extend_from_slice(inner);
    seq.extend(scenario.end());
    seq
}

/// Checks the fixed endpoints, the index range and uniqueness.
pub fn is_valid_sequence(seq: &[usize], scenario: &Scenario) -> bool {
    if seq.first() != Some(&Scenario::START) {
        return false;
    }
    if let Some(end) = scenario.end() {
        if seq.len() < 2 || seq[seq.len() - 1] != end {
            return false;
        }
    }
    let mut seen = vec![false; scenario.waypoint_count()];
    for &i in intermediates(seq, scenario) {
        if !scenario.is_intermediate(i) || std::mem::replace(&mut seen[i], true) {
            return false;
        }
    }
    true
}

/// A uniform length in `0..=count`, then a uniform ordered selection of
/// that many intermediates.
pub fn random_sequence<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> WaypointSequence {
    let mut pool: Vec<usize> = scenario.intermediates().collect();
    let k = rng.gen_range(0..=pool.len());
    let (chosen, _) = pool.partial_shuffle(rng, k);
    with_endpoints(chosen, scenario)
}

pub fn init_population<R: Rng + ?Sized>(scenario: &Scenario, size: usize, rng: &mut R) -> Vec<WaypointSequence> {
    (0..size).map(|_| random_sequence(scenario, rng)).collect()
}

/// Swaps two distinct intermediate positions with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(seq: &mut [usize], scenario: &Scenario, p_m: f64, rng: &mut R) {
    let hi = seq.len() - usize::from(scenario.end().is_some() && seq.len() >= 2);
    let count = hi.saturating_sub(1);
    if count < 2 || !rng.gen_bool(p_m.clamp(0.0, 1.0)) {
        return;
    }
    let a = rng.gen_range(0..count);
    let mut b = rng.gen_range(0..count - 1);
    if b >= a {
        b += 1;
    }
    seq.swap(1 + a, 1 + b);
}
