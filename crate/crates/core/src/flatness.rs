//! Differential-flatness maps between flat outputs and model states/inputs.
//!
//! The planner produces the flat output `y(t)` (the planar position) and its
//! first two derivatives analytically from the clothoid trajectory. The maps
//! here turn that into the states and inputs of the differential-drive and
//! quadruped models so input and state bounds can be checked without
//! integrating any dynamics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clothoid::{fmt_sig, Trajectory};
use crate::error::FlatnessError;
use crate::geometry::Point;
use crate::scenario::DiffDriveParams;

/// Below this flat-output speed heading and turn rate are undefined.
pub const DEGENERATE_SPEED: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatSample {
    pub t: f64,
    pub y: Point,
    pub y_dot: Point,
    pub y_ddot: Point,
    /// Heading and heading rate, needed by the quadruped map.
    pub theta: Option<f64>,
    pub theta_dot: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlatTrace {
    pub samples: Vec<FlatSample>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffDriveSample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Linear speed `v`.
    pub u1: f64,
    /// Turn rate `omega`.
    pub u2: f64,
    pub u1_dot: f64,
    pub wheels: Option<WheelSpeeds>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadrupedSample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub theta: f64,
    /// Body-frame velocities and rotational speed.
    pub u: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateInputTrace {
    DiffDrive(Vec<DiffDriveSample>),
    Quadruped(Vec<QuadrupedSample>),
}

/// Which quadruped velocity map to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadrupedMap {
    /// `R(theta) [x1', x2', theta'] + theta' M(theta) [x1, x2, theta]`.
    #[default]
    Published,
    /// World velocity rotated into the body frame, `R(theta)^T [x1', x2']`.
    StandardBodyTwist,
}

/// Analytic flat outputs of a timed clothoid trajectory.
pub fn flat_trace_from_trajectory(traj: &Trajectory) -> Result<FlatTrace, FlatnessError> {
    if traj.samples.len() < 2 {
        return Err(FlatnessError::TooFewSamples);
    }
    let samples = traj
        .samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            if !(s.speed > 0.0) {
                return Err(FlatnessError::ZeroSpeedSample { index });
            }
            let (sin, cos) = s.heading.sin_cos();
            let v = s.speed;
            let normal = v * v * s.curvature;
            Ok(FlatSample {
                t: s.t,
                y: s.position,
                y_dot: Point::new(v * cos, v * sin),
                y_ddot: Point::new(s.accel * cos - normal * sin, s.accel * sin + normal * cos),
                theta: Some(s.heading),
                theta_dot: Some(v * s.curvature),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FlatTrace { samples })
}

pub fn wheel_speeds(v: f64, omega: f64, params: &DiffDriveParams) -> WheelSpeeds {
    let half = 0.5 * omega * params.track_width;
    WheelSpeeds { left: (v - half) / params.wheel_radius, right: (v + half) / params.wheel_radius }
}

/// Inverse of [`wheel_speeds`]: `(v, omega)`.
pub fn body_speeds(wheels: WheelSpeeds, params: &DiffDriveParams) -> (f64, f64) {
    let r = params.wheel_radius;
    (0.5 * r * (wheels.right + wheels.left), r / params.track_width * (wheels.right - wheels.left))
}

/// Unicycle dynamics `x' = (u1 cos x3, u1 sin x3, u2)`.
pub fn diffdrive_dynamics(x3: f64, u1: f64, u2: f64) -> [f64; 3] {
    [u1 * x3.cos(), u1 * x3.sin(), u2]
}

/// Flat outputs to differential-drive states and inputs, forward branch
/// (`u1 > 0`).
pub fn diffdrive_forward(flat: &FlatTrace, params: Option<&DiffDriveParams>) -> Result<StateInputTrace, FlatnessError> {
    let samples = flat
        .samples
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let (d, dd) = (f.y_dot, f.y_ddot);
            let sq = d.x * d.x + d.y * d.y;
            let speed = sq.sqrt();
            if !(speed >= DEGENERATE_SPEED) {
                return Err(FlatnessError::DegenerateVelocity { index });
            }
            let u1 = speed;
            let u2 = (d.x * dd.y - dd.x * d.y) / sq;
            Ok(DiffDriveSample {
                t: f.t,
                x1: f.y.x,
                x2: f.y.y,
                x3: d.y.atan2(d.x),
                u1,
                u2,
                u1_dot: (d.x * dd.x + d.y * dd.y) / speed,
                wheels: params.map(|p| wheel_speeds(u1, u2, p)),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StateInputTrace::DiffDrive(samples))
}

/// Differential-drive states and inputs back to flat outputs.
pub fn diffdrive_inverse(samples: &[DiffDriveSample]) -> Result<FlatTrace, FlatnessError> {
    let samples = samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            if s.u1 == 0.0 {
                return Err(FlatnessError::ZeroInput { index });
            }
            let (sin, cos) = s.x3.sin_cos();
            let turn = s.u1 * s.u2;
            Ok(FlatSample {
                t: s.t,
                y: Point::new(s.x1, s.x2),
                y_dot: Point::new(s.u1 * cos, s.u1 * sin),
                y_ddot: Point::new(s.u1_dot * cos - turn * sin, s.u1_dot * sin + turn * cos),
                theta: Some(s.x3),
                theta_dot: Some(s.u2),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FlatTrace { samples })
}

/// Quadruped body velocities for a single state and its derivative.
pub fn quadruped_inputs(x: [f64; 3], x_dot: [f64; 3], map: QuadrupedMap) -> [f64; 3] {
    let (sin, cos) = x[2].sin_cos();
    match map {
        QuadrupedMap::Published => {
            let w = x_dot[2];
            [
                cos * x_dot[0] - sin * x_dot[1] + w * (-sin * x[0] - cos * x[1]),
                sin * x_dot[0] + cos * x_dot[1] + w * (cos * x[0] - sin * x[1]),
                x_dot[2],
            ]
        }
        QuadrupedMap::StandardBodyTwist => {
            [cos * x_dot[0] + sin * x_dot[1], -sin * x_dot[0] + cos * x_dot[1], x_dot[2]]
        }
    }
}

pub fn quadruped_forward(flat: &FlatTrace, map: QuadrupedMap) -> Result<StateInputTrace, FlatnessError> {
    let samples = flat
        .samples
        .iter()
        .map(|f| {
            let (Some(theta), Some(theta_dot)) = (f.theta, f.theta_dot) else {
                return Err(FlatnessError::MissingHeading);
            };
            let x = [f.y.x, f.y.y, theta];
            let u = quadruped_inputs(x, [f.y_dot.x, f.y_dot.y, theta_dot], map);
            Ok(QuadrupedSample { t: f.t, x1: x[0], x2: x[1], theta, u })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StateInputTrace::Quadruped(samples))
}

impl StateInputTrace {
    pub fn len(&self) -> usize {
        match self {
            Self::DiffDrive(s) => s.len(),
            Self::Quadruped(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            Self::DiffDrive(s) => s.iter().map(|s| s.t).collect(),
            Self::Quadruped(s) => s.iter().map(|s| s.t).collect(),
        }
    }

    /// CSV export. Differential drive: `t,x1,x2,x3,u1,u2,u1_dot[,wL,wR]`;
    /// quadruped: `t,x1,x2,x3,u1,u2,u3` with `x3` the heading.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut row = |cells: &[f64]| {
            let cells: Vec<String> = cells.iter().map(|&v| fmt_sig(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        };
        match self {
            Self::DiffDrive(samples) => {
                for s in samples {
                    match s.wheels {
                        Some(w) => row(&[s.t, s.x1, s.x2, s.x3, s.u1, s.u2, s.u1_dot, w.left, w.right]),
                        None => row(&[s.t, s.x1, s.x2, s.x3, s.u1, s.u2, s.u1_dot]),
                    }
                }
                let wheels = samples.first().is_some_and(|s| s.wheels.is_some());
                let header = if wheels { "t,x1,x2,x3,u1,u2,u1_dot,wL,wR" } else { "t,x1,x2,x3,u1,u2,u1_dot" };
                format!("{header}\n{out}")
            }
            Self::Quadruped(samples) => {
                for s in samples {
                    row(&[s.t, s.x1, s.x2, s.theta, s.u[0], s.u[1], s.u[2]]);
                }
                format!("t,x1,x2,x3,u1,u2,u3\n{out}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn flat(y: Point, y_dot: Point, y_ddot: Point) -> FlatTrace {
        FlatTrace { samples: vec![FlatSample { t: 0.0, y, y_dot, y_ddot, theta: None, theta_dot: None }] }
    }

    fn diffdrive(trace: StateInputTrace) -> Vec<DiffDriveSample> {
        match trace {
            StateInputTrace::DiffDrive(s) => s,
            StateInputTrace::Quadruped(_) => panic!("wrong model"),
        }
    }

    #[test]
    fn straight_line_inputs() {
        let f = flat(Point::new(1.0, 2.0), Point::new(0.7, 0.0), Point::new(0.0, 0.0));
        let s = diffdrive(diffdrive_forward(&f, None).unwrap())[0];
        assert_eq!((s.x3, s.u1, s.u2, s.u1_dot), (0.0, 0.7, 0.0, 0.0));
    }

    #[test]
    fn circular_motion() {
        let (r, w, phase) = (2.0, 0.3, 0.7f64);
        let f = flat(
            Point::new(r * phase.cos(), r * phase.sin()),
            Point::new(-r * w * phase.sin(), r * w * phase.cos()),
            Point::new(-r * w * w * phase.cos(), -r * w * w * phase.sin()),
        );
        let s = diffdrive(diffdrive_forward(&f, None).unwrap())[0];
        assert!((s.u1 - r * w).abs() < 1e-12);
        assert!((s.u2 - w).abs() < 1e-12);
        assert!(s.u1_dot.abs() < 1e-12);
    }

    #[test]
    fn inverse_formula() {
        let s = DiffDriveSample { t: 0.0, x1: 0.0, x2: 0.0, x3: FRAC_PI_2, u1: 1.0, u2: 0.0, u1_dot: 1.0, wheels: None };
        let f = diffdrive_inverse(&[s]).unwrap().samples[0];
        assert!(f.y_dot.x.abs() < 1e-15 && (f.y_dot.y - 1.0).abs() < 1e-15);
        assert!(f.y_ddot.x.abs() < 1e-15 && (f.y_ddot.y - 1.0).abs() < 1e-15);
        let zero = DiffDriveSample { u1: 0.0, ..s };
        assert_eq!(diffdrive_inverse(&[zero]), Err(FlatnessError::ZeroInput { index: 0 }));
    }

    #[test]
    fn turning_round_trip() {
        let f = flat(Point::new(0.3, -1.0), Point::new(0.4, 0.9), Point::new(-0.5, 0.2));
        let back = diffdrive_inverse(&diffdrive(diffdrive_forward(&f, None).unwrap())).unwrap().samples[0];
        let orig = f.samples[0];
        for (a, b) in [(back.y, orig.y), (back.y_dot, orig.y_dot), (back.y_ddot, orig.y_ddot)] {
            assert!(a.distance(b) < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn degenerate_velocity() {
        let f = flat(Point::new(0.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(diffdrive_forward(&f, None), Err(FlatnessError::DegenerateVelocity { index: 0 }));
    }

    #[test]
    fn wheel_map_inverts() {
        let p = DiffDriveParams { wheel_radius: 0.1, track_width: 0.4 };
        let w = wheel_speeds(0.8, -0.6, &p);
        let (v, om) = body_speeds(w, &p);
        assert!((v - 0.8).abs() < 1e-14 && (om + 0.6).abs() < 1e-14);
        assert!(w.right < w.left);
    }

    #[test]
    fn quadruped_published_map() {
        let v = 0.5;
        assert_eq!(quadruped_inputs([3.0, 4.0, 0.0], [v, 0.0, 0.0], QuadrupedMap::Published), [v, 0.0, 0.0]);
        let u = quadruped_inputs([3.0, 4.0, FRAC_PI_2], [v, 0.0, 0.0], QuadrupedMap::Published);
        assert!(u[0].abs() < 1e-15 && (u[1] - v).abs() < 1e-15 && u[2] == 0.0);
        let u = quadruped_inputs([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], QuadrupedMap::Published);
        assert_eq!(u, [0.0, 1.0, 1.0]);
    }

    #[test]
    fn quadruped_standard_twist() {
        let u = quadruped_inputs([5.0, 5.0, FRAC_PI_2], [0.0, 0.5, 0.2], QuadrupedMap::StandardBodyTwist);
        assert!((u[0] - 0.5).abs() < 1e-15 && u[1].abs() < 1e-15 && u[2] == 0.2);
    }

    #[test]
    fn quadruped_requires_heading() {
        let f = flat(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0));
        assert_eq!(quadruped_forward(&f, QuadrupedMap::Published), Err(FlatnessError::MissingHeading));
    }
}
