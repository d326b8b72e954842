use rand::Rng;

use crate::geometry::Point;
use crate::scenario::Scenario;

use super::dtw::dtw_warp;
use super::sequence::{intermediates, with_endpoints, WaypointSequence};

/// Range of the blend factor of the extended convex combination.
pub const BETA_RANGE: (f64, f64) = (-0.15, 1.15);

/// Warping crossover with a uniformly drawn blend factor per aligned pair.
pub fn crossover_warp<R: Rng + ?Sized>(
    s1: &[usize],
    s2: &[usize],
    scenario: &Scenario,
    rng: &mut R,
) -> WaypointSequence {
    crossover_warp_with(s1, s2, scenario, || rng.gen_range(BETA_RANGE.0..=BETA_RANGE.1))
}

/// Warping crossover with blend factors taken from `beta`, one call per
/// aligned pair.
///
/// The parents are aligned by DTW on waypoint positions, each aligned pair
/// is blended as `(1 - beta) p1 + beta p2`, the blend is projected onto the
/// nearest waypoint, repeats are dropped (first occurrence wins) and the
/// fixed endpoints are put back in place.
pub fn crossover_warp_with(
    s1: &[usize],
    s2: &[usize],
    scenario: &Scenario,
    mut beta: impl FnMut() -> f64,
) -> WaypointSequence {
    let pos = |s: &[usize]| -> Vec<Point> { s.iter().map(|&i| scenario.waypoints[i].position).collect() };
    let (p1, p2) = (pos(s1), pos(s2));
    let alignment = dtw_warp(&p1, &p2);

    let mut seen = vec![false; scenario.waypoint_count()];
    seen[Scenario::START] = true;
    if let Some(end) = scenario.end() {
        seen[end] = true;
    }
    let mut inner = Vec::with_capacity(alignment.pairs.len());
    for &(i, j) in &alignment.pairs {
        let b = beta();
        let blended = p1[i] * (1.0 - b) + p2[j] * b;
        let q = scenario.nearest_waypoint(blended);
        if !std::mem::replace(&mut seen[q], true) {
            inner.push(q);
        }
    }
    with_endpoints(&inner, scenario)
}

/// Random subsequence insertion: a contiguous block of `s1`'s
/// intermediates is removed from `s2` and inserted back at a uniform
/// position.
pub fn crossover_subsequence<R: Rng + ?Sized>(
    s1: &[usize],
    s2: &[usize],
    scenario: &Scenario,
    rng: &mut R,
) -> WaypointSequence {
    let a = intermediates(s1, scenario);
    let mut lo = rng.gen_range(0..=a.len());
    let mut hi = rng.gen_range(0..=a.len());
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    subsequence_insert(s2, &a[lo..hi], scenario, |n| rng.gen_range(0..=n))
}

/// Removes `block` from `s2`'s intermediates and inserts it at the position
/// returned by `at(remaining_len)`.
pub fn subsequence_insert(
    s2: &[usize],
    block: &[usize],
    scenario: &Scenario,
    at: impl FnOnce(usize) -> usize,
) -> WaypointSequence {
    let mut rest: Vec<usize> = intermediates(s2, scenario).iter().copied().filter(|i| !block.contains(i)).collect();
    let k = at(rest.len()).min(rest.len());
    rest.splice(k..k, block.iter().copied());
    with_endpoints(&rest, scenario)
}
