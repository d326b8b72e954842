use std::f64::consts::FRAC_PI_2;

use crate::error::ClothoidError;
use crate::geometry::{wrap_angle, Point};
use crate::memo::BoundedMemo;
use crate::scenario::OccupancyGrid;
use crate::search::GridPath;

use super::segment::{fit_g1, ClothoidSegment, SegmentWalker};
use super::trajectory::segment_intervals;

/// Memo of segment fits and collision checks, shared across paths built on
/// the same grid. A hit returns exactly what a fresh computation would.
#[derive(Debug)]
pub struct SegmentCache {
    fits: BoundedMemo<[u64; 6], Result<ClothoidSegment, ClothoidError>>,
    collisions: BoundedMemo<[u64; 6], bool>,
}

// Each map is dropped wholesale once it reaches this many entries.
const SEGMENT_CACHE_LIMIT: usize = 1 << 20;

fn bits(v: [f64; 6]) -> [u64; 6] {
    v.map(f64::to_bits)
}

impl Default for SegmentCache {
    fn default() -> Self {
        Self { fits: BoundedMemo::new(SEGMENT_CACHE_LIMIT), collisions: BoundedMemo::new(SEGMENT_CACHE_LIMIT) }
    }
}

impl SegmentCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.fits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fit(&self, p0: Point, theta0: f64, p1: Point, theta1: f64) -> Result<ClothoidSegment, ClothoidError> {
        let key = bits([p0.x, p0.y, theta0, p1.x, p1.y, theta1]);
        self.fits.get_or_insert_with(key, || fit_g1(p0, theta0, p1, theta1))
    }

    fn collides(&self, seg: &ClothoidSegment, grid: &OccupancyGrid) -> bool {
        let key = bits([seg.start.position.x, seg.start.position.y, seg.start.heading, seg.kappa0, seg.kappa_rate, seg.length]);
        self.collisions.get_or_insert_with(key, || segment_collides(seg, grid))
    }
}

fn fit(cache: Option<&SegmentCache>, p0: Point, theta0: f64, p1: Point, theta1: f64) -> Result<ClothoidSegment, ClothoidError> {
    match cache {
        Some(c) => c.fit(p0, theta0, p1, theta1),
        None => fit_g1(p0, theta0, p1, theta1),
    }
}

fn collides(cache: Option<&SegmentCache>, seg: &ClothoidSegment, grid: &OccupancyGrid) -> bool {
    match cache {
        Some(c) => c.collides(seg, grid),
        None => segment_collides(seg, grid),
    }
}

/// G1-continuous chain of clothoid segments through a list of knots.
///
/// Each knot remembers where it sits on the source polyline as a
/// fractional point index (`3.0` is polyline point 3, `3.5` the middle of
/// the straight piece between points 3 and 4).
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseClothoid {
    pub segments: Vec<ClothoidSegment>,
    pub knots: Vec<Point>,
    pub headings: Vec<f64>,
    pub knot_params: Vec<f64>,
    offsets: Vec<f64>,
    total_length: f64,
}

impl PiecewiseClothoid {
    fn from_parts(knots: Vec<Point>, headings: Vec<f64>, knot_params: Vec<f64>, segments: Vec<ClothoidSegment>) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for s in &segments {
            offsets.push(acc);
            acc += s.length;
        }
        Self { segments, knots, headings, knot_params, offsets, total_length: acc }
    }

    pub fn length(&self) -> f64 {
        self.total_length
    }

    /// Arc length at which segment `i` starts.
    pub fn segment_offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    /// Segment index and local arc length for a global arc length `s`.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let i = self.offsets.partition_point(|&o| o <= s).saturating_sub(1);
        let local = (s - self.offsets[i]).clamp(0.0, self.segments[i].length);
        (i, local)
    }

    /// Position, heading and curvature at arc length `s`.
    pub fn sample(&self, s: f64) -> Result<(Point, f64, f64), ClothoidError> {
        let length = self.total_length;
        if !(0.0..=length).contains(&s) || self.segments.is_empty() {
            return Err(ClothoidError::OutOfRange { s, length });
        }
        let (i, local) = self.locate(s);
        let seg = &self.segments[i];
        Ok((seg.position(local), seg.heading(local), seg.curvature(local)))
    }

    /// Largest position/heading gap between consecutive segments.
    pub fn joint_residuals(&self) -> (f64, f64) {
        let mut worst = (0.0f64, 0.0f64);
        for w in self.segments.windows(2) {
            let end = w[0].end_pose();
            let dp = end.position.distance(w[1].start.position);
            let dh = wrap_angle(end.heading - w[1].start.heading).abs();
            worst = (worst.0.max(dp), worst.1.max(dh));
        }
        worst
    }
}

pub fn length(path: &PiecewiseClothoid) -> f64 {
    path.length()
}

/// Tangent direction at every polyline point: the bisector of the incoming
/// and outgoing bearings inside, the single adjacent bearing at the ends.
/// A full reversal turns the incoming bearing left by a right angle.
pub fn assign_headings(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let bearings: Vec<f64> = points.windows(2).map(|w| w[0].bearing_to(w[1])).collect();
    (0..n)
        .map(|i| {
            if i == 0 {
                bearings[0]
            } else if i == n - 1 {
                bearings[n - 2]
            } else {
                bisector(bearings[i - 1], bearings[i])
            }
        })
        .collect()
}

fn bisector(incoming: f64, outgoing: f64) -> f64 {
    let turn = wrap_angle(outgoing - incoming);
    if turn.abs() >= std::f64::consts::PI - 1e-12 {
        wrap_angle(incoming + FRAC_PI_2)
    } else {
        wrap_angle(incoming + 0.5 * turn)
    }
}

fn heading_at(knots: &[Point], i: usize) -> f64 {
    let n = knots.len();
    if i == 0 {
        knots[0].bearing_to(knots[1])
    } else if i == n - 1 {
        knots[n - 2].bearing_to(knots[n - 1])
    } else {
        bisector(knots[i - 1].bearing_to(knots[i]), knots[i].bearing_to(knots[i + 1]))
    }
}

fn dedup_consecutive(points: &[Point]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if keep.last().map(|&j| points[j] != *p).unwrap_or(true) {
            keep.push(i);
        }
    }
    keep
}

/// One clothoid per consecutive pair of polyline points, with tangents from
/// [`assign_headings`].
pub fn build_path(polyline: &GridPath) -> Result<PiecewiseClothoid, ClothoidError> {
    let keep = dedup_consecutive(&polyline.points);
    if keep.len() < 2 {
        return Err(ClothoidError::TooFewPoints);
    }
    let knots: Vec<Point> = keep.iter().map(|&i| polyline.points[i]).collect();
    let params = keep.iter().map(|&i| i as f64).collect();
    build_from_knots(knots, params, None)
}

/// Path through a subset of polyline points given by (fractional) indices.
pub fn build_through(polyline: &GridPath, params: &[f64]) -> Result<PiecewiseClothoid, ClothoidError> {
    build_through_cached(polyline, params, None)
}

/// [`build_through`] drawing segment fits from `cache`.
pub fn build_through_cached(
    polyline: &GridPath,
    params: &[f64],
    cache: Option<&SegmentCache>,
) -> Result<PiecewiseClothoid, ClothoidError> {
    let mut knots = Vec::with_capacity(params.len());
    let mut kept = Vec::with_capacity(params.len());
    for &p in params {
        let q = point_at(&polyline.points, p);
        if knots.last() != Some(&q) {
            knots.push(q);
            kept.push(p);
        }
    }
    if knots.len() < 2 {
        return Err(ClothoidError::TooFewPoints);
    }
    build_from_knots(knots, kept, cache)
}

fn build_from_knots(
    knots: Vec<Point>,
    params: Vec<f64>,
    cache: Option<&SegmentCache>,
) -> Result<PiecewiseClothoid, ClothoidError> {
    let headings = assign_headings(&knots);
    let segments = knots
        .windows(2)
        .zip(headings.windows(2))
        .enumerate()
        .map(|(index, (p, h))| {
            fit(cache, p[0], h[0], p[1], h[1]).map_err(|e| ClothoidError::Segment { index, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewiseClothoid::from_parts(knots, headings, params, segments))
}

fn point_at(points: &[Point], param: f64) -> Point {
    let i = (param.floor() as usize).min(points.len() - 1);
    let frac = param - i as f64;
    if frac <= 0.0 || i + 1 >= points.len() {
        points[i]
    } else {
        points[i].lerp(points[i + 1], frac)
    }
}

/// Largest arc-length step used when checking a segment against the grid;
/// the samples are those of the exported trajectory.
pub fn collision_step(grid: &OccupancyGrid) -> f64 {
    grid.resolution() / 2.0
}

// Samples closer to a checked sample than its clearance are free and are
// skipped.
fn segment_collides(seg: &ClothoidSegment, grid: &OccupancyGrid) -> bool {
    let n = segment_intervals(seg.length, collision_step(grid));
    let spacing = seg.length / n as f64;
    let mut walker = SegmentWalker::new(seg);
    let mut k = 0;
    while k <= n {
        let p = walker.advance_to(seg.length * k as f64 / n as f64);
        if !grid.is_free(p) {
            return true;
        }
        let reach = if spacing > 0.0 { (grid.clearance(p) / spacing).ceil().min(n as f64 + 1.0) } else { 0.0 };
        k += (reach as usize).max(1);
    }
    false
}

/// Inserts knots from the source polyline into every segment that leaves
/// free space until the whole path is collision-free.
///
/// The new knot is the middle polyline point of the offending interval;
/// once an interval spans a single straight polyline piece, its geometric
/// midpoint is used instead.
pub fn refine_collision(path: &PiecewiseClothoid, polyline: &GridPath, grid: &OccupancyGrid) -> PiecewiseClothoid {
    refine_collision_cached(path, polyline, grid, None)
}

/// [`refine_collision`] drawing fits and collision checks from `cache`.
pub fn refine_collision_cached(
    path: &PiecewiseClothoid,
    polyline: &GridPath,
    grid: &OccupancyGrid,
    cache: Option<&SegmentCache>,
) -> PiecewiseClothoid {
    let mut knots = path.knots.clone();
    let mut params = path.knot_params.clone();
    let mut headings = path.headings.clone();
    let mut segments = path.segments.clone();
    // None: not yet checked; Some(true): free; Some(false): gave up.
    let mut status: Vec<Option<bool>> = vec![None; segments.len()];
    let mut budget = 8 * polyline.points.len() + 64;

    let mut i = 0;
    while i < segments.len() {
        if status[i].is_some() {
            i += 1;
            continue;
        }
        if !collides(cache, &segments[i], grid) {
            status[i] = Some(true);
            i += 1;
            continue;
        }
        let (a, b) = (params[i], params[i + 1]);
        let mid = 0.5 * (a + b);
        let whole = mid.floor();
        let insert = if whole > a && whole < b { whole } else { mid };
        let q = point_at(&polyline.points, insert);
        if budget == 0 || b - a < 1e-6 || q == knots[i] || q == knots[i + 1] {
            status[i] = Some(false);
            i += 1;
            continue;
        }
        budget -= 1;

        knots.insert(i + 1, q);
        params.insert(i + 1, insert);
        headings.insert(i + 1, 0.0);
        segments.insert(i + 1, segments[i]);
        status.insert(i + 1, None);

        for k in i..=(i + 2).min(knots.len() - 1) {
            headings[k] = heading_at(&knots, k);
        }
        let lo = i.saturating_sub(1);
        let hi = (i + 2).min(segments.len() - 1);
        let mut failed = false;
        for s in lo..=hi {
            match fit(cache, knots[s], headings[s], knots[s + 1], headings[s + 1]) {
                Ok(seg) => {
                    segments[s] = seg;
                    status[s] = None;
                }
                Err(_) => failed = true,
            }
        }
        if failed {
            // Keep the previous geometry rather than abandoning the path.
            status[i] = Some(false);
        }
        i = lo;
    }
    PiecewiseClothoid::from_parts(knots, headings, params, segments)
}

/// True when every sampled point of every segment is free.
pub fn is_collision_free(path: &PiecewiseClothoid, grid: &OccupancyGrid) -> bool {
    path.segments.iter().all(|s| !segment_collides(s, grid))
}
