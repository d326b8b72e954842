use std::fmt::Write as _;

use crate::error::TrajectoryError;
use crate::geometry::Point;
use crate::scenario::ConstraintSet;

use super::path::PiecewiseClothoid;
use super::segment::{ClothoidSegment, SegmentWalker};

/// Fraction of `v_max` used as cruise speed when no time window is given.
pub const CRUISE_FACTOR: f64 = 0.8;
/// Per-step shrink of the final time while the cruise speed is below `v_min`.
pub const TIME_REDUCTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub s: f64,
    pub position: Point,
    pub heading: f64,
    pub curvature: f64,
    pub speed: f64,
    /// Tangential acceleration; zero for the constant-speed profile.
    pub accel: f64,
    /// Lateral acceleration magnitude `v^2 |kappa|`.
    pub accel_lat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub t_f: f64,
    pub total_length: f64,
}

/// Cruise speed and final time for a path of length `length`.
///
/// With a time window the slowest admissible speed `length / t_max` is used,
/// otherwise `CRUISE_FACTOR * v_max`. Speeds below `v_min` shrink the final
/// time by `TIME_REDUCTION` until they are not, then land exactly on
/// `v_min`; speeds above `v_max` are clamped.
pub fn cruise_speed(length: f64, constraints: &ConstraintSet) -> Result<(f64, f64), TrajectoryError> {
    let (v_min, v_max) = (constraints.v_min, constraints.v_max);
    if v_min > v_max {
        return Err(TrajectoryError::InfeasibleSpeedBand { v_min, v_max });
    }
    let mut t_f = match constraints.t_max {
        Some(t_max) => t_max,
        None if v_max > 0.0 => length / (CRUISE_FACTOR * v_max),
        None => return Err(TrajectoryError::NoSpeedReference),
    };
    if v_min > 0.0 && length / t_f < v_min {
        while length / t_f < v_min {
            t_f *= TIME_REDUCTION;
        }
        t_f = length / v_min;
    }
    let mut v = length / t_f;
    if v > v_max {
        v = v_max;
        t_f = length / v;
    }
    Ok((v, t_f))
}

/// Number of samples that keeps the arc-length spacing at or below half a
/// grid cell.
pub fn default_sample_count(length: f64, resolution: f64) -> usize {
    let dense = (2.0 * length / resolution).ceil() as usize + 1;
    dense.max(100)
}

/// Constant-speed timing of `path` with `sample_count` samples uniform in arc
/// length.
pub fn parameterize_time(
    path: &PiecewiseClothoid,
    constraints: &ConstraintSet,
    sample_count: usize,
) -> Result<Trajectory, TrajectoryError> {
    if sample_count < 2 {
        return Err(TrajectoryError::TooFewSamples);
    }
    let length = path.length();
    if !(length > 0.0) {
        return Err(TrajectoryError::EmptyPath);
    }
    let (v, t_f) = cruise_speed(length, constraints)?;

    let mut samples = Vec::with_capacity(sample_count);
    let last = (sample_count - 1) as f64;
    let mut seg = 0;
    let mut walker = SegmentWalker::new(&path.segments[0]);
    for k in 0..sample_count {
        let s = if k + 1 == sample_count { length } else { length * k as f64 / last };
        while seg + 1 < path.segments.len() && path.segment_offset(seg + 1) <= s {
            seg += 1;
            walker = SegmentWalker::new(&path.segments[seg]);
        }
        let c = &path.segments[seg];
        let local = (s - path.segment_offset(seg)).clamp(0.0, c.length);
        let curvature = c.curvature(local);
        samples.push(TrajectorySample {
            t: if k + 1 == sample_count { t_f } else { t_f * k as f64 / last },
            s,
            position: walker.advance_to(local),
            heading: c.heading(local),
            curvature,
            speed: v,
            accel: 0.0,
            accel_lat: v * v * curvature.abs(),
        });
    }
    Ok(Trajectory { samples, t_f, total_length: length })
}

/// Fewest sample intervals placed on any one segment.
pub const MIN_SEGMENT_INTERVALS: usize = 4;

/// Sample intervals on a segment of `length` so that the spacing stays at or
/// below `max_spacing`.
pub fn segment_intervals(length: f64, max_spacing: f64) -> usize {
    ((length / max_spacing).ceil() as usize).max(MIN_SEGMENT_INTERVALS)
}

/// `intervals + 1` samples uniform in arc length over one segment at speed
/// `v`, both endpoints included. Time and arc length start at zero.
pub fn sample_segment(seg: &ClothoidSegment, v: f64, intervals: usize) -> Vec<TrajectorySample> {
    let mut walker = SegmentWalker::new(seg);
    let last = intervals as f64;
    (0..=intervals)
        .map(|k| {
            let s = if k == intervals { seg.length } else { seg.length * k as f64 / last };
            let curvature = seg.curvature(s);
            TrajectorySample {
                t: s / v,
                s,
                position: walker.advance_to(s),
                heading: seg.heading(s),
                curvature,
                speed: v,
                accel: 0.0,
                accel_lat: v * v * curvature.abs(),
            }
        })
        .collect()
}

/// Constant-speed timing of `path` with each segment sampled on its own
/// uniform grid of spacing at most `max_spacing`. Samples on a segment are
/// exactly those of [`sample_segment`]; shared endpoints appear once.
pub fn parameterize_time_piecewise(
    path: &PiecewiseClothoid,
    constraints: &ConstraintSet,
    max_spacing: f64,
) -> Result<Trajectory, TrajectoryError> {
    let length = path.length();
    if !(length > 0.0) {
        return Err(TrajectoryError::EmptyPath);
    }
    if !(max_spacing > 0.0) {
        return Err(TrajectoryError::TooFewSamples);
    }
    let (v, t_f) = cruise_speed(length, constraints)?;
    let mut samples = Vec::new();
    let count = path.segments.len();
    for (i, seg) in path.segments.iter().enumerate() {
        let offset = path.segment_offset(i);
        let mut local = sample_segment(seg, v, segment_intervals(seg.length, max_spacing));
        if i + 1 < count {
            local.pop();
        }
        samples.extend(local.into_iter().map(|mut p| {
            p.s += offset;
            p.t = p.s / v;
            p
        }));
    }
    if let Some(end) = samples.last_mut() {
        end.s = length;
        end.t = t_f;
    }
    Ok(Trajectory { samples, t_f, total_length: length })
}

/// `%.9g`-style formatting: nine significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Trajectory {
    /// CSV with header `t,x,y,theta,kappa,v,a_lat`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,theta,kappa,v,a_lat\n");
        for s in &self.samples {
            let row = [s.t, s.position.x, s.position.y, s.heading, s.curvature, s.speed, s.accel_lat];
            let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clothoid::build_path;
    use crate::search::GridPath;

    fn constraints(t_max: Option<f64>, v_max: f64, v_min: f64) -> ConstraintSet {
        ConstraintSet { t_max, v_min, ..ConstraintSet::new(v_max) }
    }

    #[test]
    fn time_window_sets_cruise_speed() {
        let (v, t) = cruise_speed(10.0, &constraints(Some(40.0), 1.0, 0.0)).unwrap();
        assert_eq!((v, t), (0.25, 40.0));
    }

    #[test]
    fn minimum_speed_loop_lands_on_v_min() {
        let (v, t) = cruise_speed(10.0, &constraints(Some(40.0), 1.0, 0.5)).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(t, 20.0);
    }

    #[test]
    fn no_window_uses_cruise_factor() {
        let (v, t) = cruise_speed(10.0, &constraints(None, 0.2, 0.0)).unwrap();
        assert!((v - 0.16).abs() < 1e-15);
        assert!((t - 62.5).abs() < 1e-12);
    }

    #[test]
    fn fast_window_is_clamped_to_v_max() {
        let (v, t) = cruise_speed(10.0, &constraints(Some(5.0), 1.0, 0.0)).unwrap();
        assert_eq!((v, t), (1.0, 10.0));
    }

    #[test]
    fn inverted_speed_band_is_an_error() {
        assert!(matches!(
            cruise_speed(1.0, &constraints(None, 0.1, 0.2)),
            Err(TrajectoryError::InfeasibleSpeedBand { .. })
        ));
    }

    #[test]
    fn samples_are_uniform_and_timed() {
        let path = build_path(&GridPath::from_points(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)])).unwrap();
        let traj = parameterize_time(&path, &constraints(Some(40.0), 1.0, 0.0), 11).unwrap();
        assert_eq!(traj.samples.len(), 11);
        assert_eq!(traj.t_f, 40.0);
        for (k, s) in traj.samples.iter().enumerate() {
            assert!((s.t - 4.0 * k as f64).abs() < 1e-12);
            assert!((s.position.x - k as f64).abs() < 1e-12);
            assert!((s.speed - 0.25).abs() < 1e-15);
        }
        assert!(parameterize_time(&path, &constraints(None, 1.0, 0.0), 1).is_err());
    }

    #[test]
    fn piecewise_samples_respect_spacing_and_knots() {
        let poly = GridPath::from_points(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 4.0)]);
        let path = build_path(&poly).unwrap();
        let traj = parameterize_time_piecewise(&path, &constraints(None, 1.0, 0.0), 0.05).unwrap();
        let first = traj.samples.first().unwrap();
        let last = traj.samples.last().unwrap();
        assert_eq!((first.s, first.t), (0.0, 0.0));
        assert_eq!((last.s, last.t), (traj.total_length, traj.t_f));
        for w in traj.samples.windows(2) {
            assert!(w[1].s > w[0].s && w[1].s - w[0].s <= 0.05 + 1e-12);
            assert!(w[1].t > w[0].t);
        }
        for i in 1..path.segments.len() {
            let knot = path.segment_offset(i);
            assert!(traj.samples.iter().any(|p| (p.s - knot).abs() < 1e-12));
        }
        let seg = &path.segments[1];
        let local = sample_segment(seg, 0.8, segment_intervals(seg.length, 0.05));
        let offset = path.segment_offset(1);
        let start = traj.samples.iter().position(|p| p.s == offset).unwrap();
        for (a, b) in local.iter().zip(&traj.samples[start..]) {
            assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig(-123456.789), "-123456.789");
        assert_eq!(fmt_sig(1.0e-7), "1e-07");
        assert_eq!(fmt_sig(12345678912.0), "1.23456789e+10");
    }
}
