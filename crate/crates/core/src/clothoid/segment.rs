use std::f64::consts::PI;

use crate::error::ClothoidError;
use crate::geometry::{wrap_angle, Point};

use super::fresnel::{generalized_fresnel, generalized_fresnel0};

/// Planar pose: position plus heading in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Point,
    pub heading: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { position: Point::new(x, y), heading }
    }
}

/// Curve whose curvature is affine in arc length:
/// `kappa(s) = kappa0 + kappa_rate * s` for `s` in `[0, length]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClothoidSegment {
    pub start: Pose,
    pub kappa0: f64,
    pub kappa_rate: f64,
    pub length: f64,
}

pub const G1_TOLERANCE: f64 = 1e-8;
const MAX_NEWTON_ITERATIONS: usize = 100;

// Polynomial fit of the root in (phi0 + phi1) used as the Newton start.
const GUESS: [f64; 6] = [
    2.989_696_028_701_907,
    0.716_228_953_608_281,
    -0.458_969_738_821_509,
    -0.502_821_153_340_377,
    0.261_062_141_752_652,
    -0.045_854_475_238_709,
];

impl ClothoidSegment {
    pub fn curvature(&self, s: f64) -> f64 {
        self.kappa0 + self.kappa_rate * s
    }

    pub fn heading(&self, s: f64) -> f64 {
        self.start.heading + self.kappa0 * s + 0.5 * self.kappa_rate * s * s
    }

    pub fn position(&self, s: f64) -> Point {
        let (c, sn) = generalized_fresnel0(self.kappa_rate * s * s, self.kappa0 * s, self.start.heading);
        Point::new(self.start.position.x + s * c, self.start.position.y + s * sn)
    }

    pub fn pose(&self, s: f64) -> Pose {
        let p = self.position(s);
        Pose { position: p, heading: self.heading(s) }
    }

    pub fn end_pose(&self) -> Pose {
        self.pose(self.length)
    }

    pub fn end_curvature(&self) -> f64 {
        self.curvature(self.length)
    }

    /// Position and heading mismatch at the end of the segment relative to
    /// `target`.
    pub fn residual(&self, target: Pose) -> (f64, f64) {
        let end = self.end_pose();
        (end.position.distance(target.position), wrap_angle(end.heading - target.heading).abs())
    }
}

/// Walks a segment at increasing arc lengths for one `sin_cos` per step
/// instead of a Fresnel evaluation per point.
///
/// Each step integrates the unit tangent `f = e^{i theta}` with the
/// endpoint-corrected trapezoid rule, using the exact derivatives
/// `f' = i kappa f` and `f''' = (-3 kappa kappa' - i kappa^3) f`. Steps are
/// split so that `|kappa| h` and `sqrt(|kappa'|) h` stay below 0.1, which
/// keeps the local error far below round-off for the lengths in use.
#[derive(Clone, Debug)]
pub struct SegmentWalker<'a> {
    seg: &'a ClothoidSegment,
    s: f64,
    position: Point,
    tangent: (f64, f64),
    max_step: f64,
}

const WALK_PHASE: f64 = 0.1;

impl<'a> SegmentWalker<'a> {
    pub fn new(seg: &'a ClothoidSegment) -> Self {
        let kappa_max = seg.kappa0.abs().max(seg.end_curvature().abs());
        let by_kappa = if kappa_max > 0.0 { WALK_PHASE / kappa_max } else { f64::INFINITY };
        let by_rate = if seg.kappa_rate != 0.0 { WALK_PHASE / seg.kappa_rate.abs().sqrt() } else { f64::INFINITY };
        let (sn, c) = seg.start.heading.sin_cos();
        Self { seg, s: 0.0, position: seg.start.position, tangent: (c, sn), max_step: by_kappa.min(by_rate) }
    }

    pub fn arc_length(&self) -> f64 {
        self.s
    }

    /// Moves forward to arc length `s` and returns the position there.
    /// Targets behind the current point leave it in place.
    pub fn advance_to(&mut self, s: f64) -> Point {
        let span = s - self.s;
        if span > 0.0 {
            let pieces = (span / self.max_step).ceil().max(1.0) as usize;
            let (from, h) = (self.s, span / pieces as f64);
            for k in 1..pieces {
                self.step(from + h * k as f64);
            }
            self.step(s);
        }
        self.position
    }

    fn step(&mut self, s1: f64) {
        let seg = self.seg;
        let h = s1 - self.s;
        let (k0, k1) = (seg.curvature(self.s), seg.curvature(s1));
        let f0 = self.tangent;
        let (sn, c) = small_sin_cos(seg.heading(s1) - seg.heading(self.s));
        let f1 = (f0.0 * c - f0.1 * sn, f0.1 * c + f0.0 * sn);
        let rate = seg.kappa_rate;
        let d1 = |k: f64, f: (f64, f64)| (-k * f.1, k * f.0);
        let d3 = |k: f64, f: (f64, f64)| {
            let (re, im) = (-3.0 * k * rate, -k * k * k);
            (re * f.0 - im * f.1, re * f.1 + im * f.0)
        };
        let (a0, a1) = (d1(k0, f0), d1(k1, f1));
        let (b0, b1) = (d3(k0, f0), d3(k1, f1));
        let (w2, w4) = (h * h / 12.0, h * h * h * h / 720.0);
        let dx = 0.5 * h * (f0.0 + f1.0) + w2 * (a0.0 - a1.0) + w4 * (b1.0 - b0.0);
        let dy = 0.5 * h * (f0.1 + f1.1) + w2 * (a0.1 - a1.1) + w4 * (b1.1 - b0.1);
        self.position = Point::new(self.position.x + dx, self.position.y + dy);
        self.tangent = f1;
        self.s = s1;
    }
}

// Taylor sine and cosine, accurate to round-off for |x| <= 0.2.
fn small_sin_cos(x: f64) -> (f64, f64) {
    if x.abs() > 0.2 {
        return x.sin_cos();
    }
    let x2 = x * x;
    let sin = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0)))));
    let cos = 1.0 - x2 / 2.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0 * (1.0 - x2 / 90.0 * (1.0 - x2 / 132.0)))));
    (sin, cos)
}

/// G1 Hermite interpolation: the clothoid leaving `p0` with heading
/// `theta0` and arriving at `p1` with heading `theta1`.
///
/// The two endpoint conditions reduce to a scalar root problem in the
/// sharpness parameter `A = kappa_rate * L² / 2`, solved with damped
/// Newton steps from a polynomial initial guess.
pub fn fit_g1(p0: Point, theta0: f64, p1: Point, theta1: f64) -> Result<ClothoidSegment, ClothoidError> {
    let d = p1 - p0;
    let r = d.norm();
    if r <= 0.0 || !r.is_finite() {
        return Err(ClothoidError::CoincidentPoints);
    }
    let phi = d.y.atan2(d.x);
    let phi0 = wrap_angle(theta0 - phi);
    let phi1 = wrap_angle(theta1 - phi);
    let delta = phi1 - phi0;

    let x = phi0 / PI;
    let y = phi1 / PI;
    let xy = x * y;
    let (x2, y2) = (x * x, y * y);
    let mut a = (phi0 + phi1)
        * (GUESS[0] + xy * (GUESS[1] + xy * GUESS[2]) + (GUESS[3] + xy * GUESS[4]) * (x2 + y2) + GUESS[5] * (x2 * x2 + y2 * y2));

    let eval = |a: f64| {
        let (c, s) = generalized_fresnel::<3>(2.0 * a, delta - a, phi0);
        (s[0], c[2] - c[1])
    };
    let (mut g, mut dg) = eval(a);
    let mut iterations = 0;
    while g.abs() > 1e-14 {
        if iterations == MAX_NEWTON_ITERATIONS {
            break;
        }
        iterations += 1;
        let step = if dg != 0.0 { g / dg } else { g.signum() * 0.1 };
        let mut lambda = 1.0;
        loop {
            let trial = a - lambda * step;
            let (gt, dgt) = eval(trial);
            if gt.abs() < g.abs() || lambda < 1e-6 {
                a = trial;
                g = gt;
                dg = dgt;
                break;
            }
            lambda *= 0.5;
        }
        if (lambda * step).abs() < 1e-16 * a.abs().max(1.0) {
            break;
        }
    }

    let (x0, _) = generalized_fresnel0(2.0 * a, delta - a, phi0);
    let length = r / x0;
    let seg = ClothoidSegment {
        start: Pose { position: p0, heading: theta0 },
        kappa0: (delta - a) / length,
        kappa_rate: 2.0 * a / (length * length),
        length,
    };
    if !(length > 0.0 && length.is_finite()) {
        return Err(ClothoidError::NonConvergence { iterations, residual: f64::INFINITY });
    }
    let (dp, dh) = seg.residual(Pose { position: p1, heading: theta1 });
    let residual = dp.max(dh);
    if residual > G1_TOLERANCE {
        return Err(ClothoidError::NonConvergence { iterations, residual });
    }
    Ok(seg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn aligned_points_give_straight_segment() {
        let seg = fit_g1(Point::new(0.0, 0.0), 0.0, Point::new(1.0, 0.0), 0.0).unwrap();
        assert!(seg.kappa0.abs() < 1e-14);
        assert!(seg.kappa_rate.abs() < 1e-14);
        assert!((seg.length - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quarter_circle() {
        let seg = fit_g1(Point::new(1.0, 0.0), FRAC_PI_2, Point::new(0.0, 1.0), PI).unwrap();
        assert!((seg.kappa0 - 1.0).abs() < 1e-12, "{seg:?}");
        assert!(seg.kappa_rate.abs() < 1e-12);
        assert!((seg.length - FRAC_PI_2).abs() < 1e-12);
        let end = seg.end_pose();
        assert!(end.position.distance(Point::new(0.0, 1.0)) < 1e-12);
        assert!((end.heading - PI).abs() < 1e-12);
        assert!((seg.curvature(seg.length) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_poses_close_to_tolerance() {
        let cases = [
            (Point::new(0.0, 0.0), 0.3, Point::new(2.0, 1.0), -1.2),
            (Point::new(-1.0, 4.0), 3.0, Point::new(0.5, 0.2), 0.1),
            (Point::new(0.0, 0.0), 0.0, Point::new(0.05, 0.05), PI / 4.0),
            (Point::new(0.0, 0.0), PI / 2.0, Point::new(0.1, 0.0), -PI / 2.0),
            (Point::new(3.0, 3.0), 3.1, Point::new(3.2, 3.0), -3.1),
        ];
        for (p0, t0, p1, t1) in cases {
            let seg = fit_g1(p0, t0, p1, t1).unwrap();
            let (dp, dh) = seg.residual(Pose { position: p1, heading: t1 });
            assert!(dp <= 1e-8 && dh <= 1e-8, "{p0:?} {t0} {p1:?} {t1}: {dp} {dh}");
        }
    }

    #[test]
    fn coincident_points_are_rejected() {
        let p = Point::new(1.0, 1.0);
        assert_eq!(fit_g1(p, 0.0, p, 1.0), Err(ClothoidError::CoincidentPoints));
    }

    #[test]
    fn small_angle_sin_cos() {
        for k in -40..=40 {
            let x = k as f64 * 0.005;
            let (s, c) = small_sin_cos(x);
            assert!((s - x.sin()).abs() < 1e-16 && (c - x.cos()).abs() < 2e-16, "{x}");
        }
    }

    #[test]
    fn walker_tracks_exact_positions() {
        let cases = [
            (Point::new(0.0, 0.0), 0.3, Point::new(2.0, 1.0), -1.2),
            (Point::new(0.0, 0.0), PI / 2.0, Point::new(0.1, 0.0), -PI / 2.0),
            (Point::new(0.0, 0.0), 0.0, Point::new(5.0, 0.0), 0.0),
            (Point::new(1.0, 0.0), FRAC_PI_2, Point::new(0.0, 1.0), PI),
        ];
        for (p0, t0, p1, t1) in cases {
            let seg = fit_g1(p0, t0, p1, t1).unwrap();
            let mut walker = SegmentWalker::new(&seg);
            for k in 0..=37 {
                let s = seg.length * k as f64 / 37.0;
                let p = walker.advance_to(s);
                assert!(p.distance(seg.position(s)) < 1e-10, "{k}: {}", p.distance(seg.position(s)));
            }
            assert_eq!(walker.arc_length(), seg.length);
        }
    }
}
