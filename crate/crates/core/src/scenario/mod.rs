//! Planning problem definition: environment, obstacles, weighted waypoints
//! and the constraint set, plus the occupancy raster used by every
//! downstream stage.
//!
//! Waypoints are addressed by their zero-based position in
//! [`Scenario::waypoints`]. Index `0` is always the fixed start; the last
//! index is the fixed end only when [`Scenario::fixed_end`] is set.

mod file;
mod grid;

use std::fmt;
use std::ops::Range;

use crate::geometry::Point;

pub use file::{load_scenario, save_scenario, ScenarioDocument};
pub use grid::{rasterize, OccupancyGrid};

pub const DEFAULT_GRID_RESOLUTION: f64 = 0.05;
pub const DEFAULT_WHEEL_RADIUS: f64 = 0.1;
pub const DEFAULT_TRACK_WIDTH: f64 = 0.4;

/// Axis-aligned rectangle, `(x, y)` is the lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self { x, y, width, height }
    }

    /// Euclidean distance from `p` to the closed rectangle (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.x - p.x).max(0.0).max(p.x - (self.x + self.width));
        let dy = (self.y - p.y).max(0.0).max(p.y - (self.y + self.height));
        dx.hypot(dy)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.x + self.width && p.y >= self.y && p.y <= self.y + self.height
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub obstacles: Vec<Rect>,
}

impl Environment {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub position: Point,
    pub reward: f64,
}

impl Waypoint {
    pub const fn new(x: f64, y: f64, reward: f64) -> Self {
        Self { position: Point::new(x, y), reward }
    }
}

/// Bounds on mission time, path length, speed band, turn rate and
/// acceleration. Absent bounds are not enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintSet {
    pub t_max: Option<f64>,
    pub d_max: Option<f64>,
    pub v_max: f64,
    pub v_min: f64,
    pub omega_max: Option<f64>,
    pub accel_max: Option<f64>,
}

impl ConstraintSet {
    pub fn new(v_max: f64) -> Self {
        Self { t_max: None, d_max: None, v_max, v_min: 0.0, omega_max: None, accel_max: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobotModel {
    DifferentialDrive,
    Quadruped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffDriveParams {
    pub wheel_radius: f64,
    pub track_width: f64,
}

impl Default for DiffDriveParams {
    fn default() -> Self {
        Self { wheel_radius: DEFAULT_WHEEL_RADIUS, track_width: DEFAULT_TRACK_WIDTH }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub environment: Environment,
    pub waypoints: Vec<Waypoint>,
    pub fixed_end: bool,
    pub constraints: ConstraintSet,
    pub model: RobotModel,
    /// Only meaningful for [`RobotModel::DifferentialDrive`].
    pub model_params: Option<DiffDriveParams>,
    pub grid_resolution: f64,
    pub inflation_radius: f64,
}

impl Scenario {
    pub const START: usize = 0;

    pub fn waypoint_count(&self) -> usize {
        self.waypoints.len()
    }

    /// Index of the mandatory terminal waypoint, if any.
    pub fn end(&self) -> Option<usize> {
        if self.fixed_end && self.waypoints.len() >= 2 {
            Some(self.waypoints.len() - 1)
        } else {
            None
        }
    }

    /// Indices that may appear freely (in any order, or not at all) in a
    /// sequence.
    pub fn intermediates(&self) -> Range<usize> {
        let n = self.waypoints.len();
        match self.end() {
            Some(_) => 1..n - 1,
            None => 1..n.max(1),
        }
    }

    pub fn intermediate_count(&self) -> usize {
        self.intermediates().len()
    }

    pub fn is_intermediate(&self, idx: usize) -> bool {
        self.intermediates().contains(&idx)
    }

    /// Sum of all intermediate rewards.
    pub fn max_reward(&self) -> f64 {
        self.intermediates().map(|i| self.waypoints[i].reward).sum()
    }

    /// Half the smallest positive intermediate reward; clamps the reward
    /// denominator of the fitness for sequences that collect nothing.
    pub fn reward_floor(&self) -> f64 {
        self.intermediates()
            .map(|i| self.waypoints[i].reward)
            .filter(|w| *w > 0.0)
            .fold(f64::INFINITY, f64::min)
            / 2.0
    }

    pub fn diffdrive_params(&self) -> DiffDriveParams {
        self.model_params.unwrap_or_default()
    }

    pub fn grid(&self) -> OccupancyGrid {
        rasterize(&self.environment, self.grid_resolution, self.inflation_radius)
    }

    /// Nearest waypoint to `p`; ties go to the lowest index.
    pub fn nearest_waypoint(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.waypoints.iter().enumerate() {
            let d = w.position.distance(p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// A single reason a scenario is not well formed.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyBounds,
    Obstacle { index: usize, reason: &'static str },
    NoWaypoints,
    FixedEndNeedsTwoWaypoints,
    WaypointNotFree { index: usize },
    NonPositiveReward { index: usize },
    EndpointReward { index: usize },
    Constraint { field: &'static str, reason: &'static str },
    ModelParams { reason: &'static str },
    Grid { reason: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyBounds => write!(f, "bounds: x_min < x_max and y_min < y_max required"),
            Violation::Obstacle { index, reason } => write!(f, "obstacle {index}: {reason}"),
            Violation::NoWaypoints => write!(f, "waypoints: at least one (the start) is required"),
            Violation::FixedEndNeedsTwoWaypoints => {
                write!(f, "waypoints: fixed_end requires at least two waypoints")
            }
            Violation::WaypointNotFree { index } => {
                write!(f, "waypoint {index}: not in the free space of the inflated grid")
            }
            Violation::NonPositiveReward { index } => {
                write!(f, "waypoint {index}: intermediate reward must be positive")
            }
            Violation::EndpointReward { index } => {
                write!(f, "waypoint {index}: fixed start/end must carry zero reward")
            }
            Violation::Constraint { field, reason } => write!(f, "constraints.{field}: {reason}"),
            Violation::ModelParams { reason } => write!(f, "model_params: {reason}"),
            Violation::Grid { reason } => write!(f, "grid: {reason}"),
        }
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Reports every way `scenario` breaks its invariants. An empty result
/// means the scenario is usable.
pub fn validate(scenario: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let env = &scenario.environment;
    let bounds_ok = env.x_min.is_finite()
        && env.x_max.is_finite()
        && env.y_min.is_finite()
        && env.y_max.is_finite()
        && env.x_min < env.x_max
        && env.y_min < env.y_max;
    if !bounds_ok {
        out.push(Violation::EmptyBounds);
    }
    for (index, r) in env.obstacles.iter().enumerate() {
        if !(positive(r.width) && positive(r.height)) || !r.x.is_finite() || !r.y.is_finite() {
            out.push(Violation::Obstacle { index, reason: "width and height must be positive" });
        } else if bounds_ok
            && (r.x >= env.x_max || r.x + r.width <= env.x_min || r.y >= env.y_max || r.y + r.height <= env.y_min)
        {
            out.push(Violation::Obstacle { index, reason: "does not intersect the bounds" });
        }
    }

    let grid_ok = positive(scenario.grid_resolution)
        && scenario.inflation_radius.is_finite()
        && scenario.inflation_radius >= 0.0;
    if !positive(scenario.grid_resolution) {
        out.push(Violation::Grid { reason: "resolution must be positive" });
    }
    if !(scenario.inflation_radius.is_finite() && scenario.inflation_radius >= 0.0) {
        out.push(Violation::Grid { reason: "inflation must be nonnegative" });
    }

    let n = scenario.waypoints.len();
    if n == 0 {
        out.push(Violation::NoWaypoints);
    } else if scenario.fixed_end && n < 2 {
        out.push(Violation::FixedEndNeedsTwoWaypoints);
    }

    if bounds_ok && grid_ok {
        let grid = scenario.grid();
        for (index, w) in scenario.waypoints.iter().enumerate() {
            if !grid.is_free(w.position) {
                out.push(Violation::WaypointNotFree { index });
            }
        }
    }
    for (index, w) in scenario.waypoints.iter().enumerate() {
        if scenario.is_intermediate(index) {
            if !positive(w.reward) {
                out.push(Violation::NonPositiveReward { index });
            }
        } else if w.reward != 0.0 {
            out.push(Violation::EndpointReward { index });
        }
    }

    let c = &scenario.constraints;
    let optional = [("t_max", c.t_max), ("d_max", c.d_max), ("omega_max", c.omega_max), ("accel_max", c.accel_max)];
    for (field, value) in optional {
        if let Some(v) = value {
            if !positive(v) {
                out.push(Violation::Constraint { field, reason: "must be positive when present" });
            }
        }
    }
    if !positive(c.v_max) {
        out.push(Violation::Constraint { field: "v_max", reason: "must be positive" });
    }
    if !(c.v_min.is_finite() && c.v_min >= 0.0) {
        out.push(Violation::Constraint { field: "v_min", reason: "must be nonnegative" });
    } else if c.v_min > c.v_max {
        out.push(Violation::Constraint { field: "v_min", reason: "exceeds v_max" });
    }

    if let Some(p) = scenario.model_params {
        if !(positive(p.wheel_radius) && positive(p.track_width)) {
            out.push(Violation::ModelParams { reason: "wheel radius and track width must be positive" });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> Scenario {
        Scenario {
            environment: Environment { x_min: 0.0, x_max: 5.0, y_min: 0.0, y_max: 3.0, obstacles: vec![] },
            waypoints: vec![Waypoint::new(0.5, 0.5, 0.0), Waypoint::new(2.5, 1.5, 2.0), Waypoint::new(4.5, 2.5, 0.0)],
            fixed_end: true,
            constraints: ConstraintSet::new(1.0),
            model: RobotModel::DifferentialDrive,
            model_params: None,
            grid_resolution: 0.05,
            inflation_radius: 0.0,
        }
    }

    #[test]
    fn valid_scenario_has_no_findings() {
        assert!(validate(&toy()).is_empty());
    }

    #[test]
    fn start_inside_inflated_obstacle_is_reported() {
        let mut s = toy();
        s.environment.obstacles.push(Rect::new(0.8, 0.0, 1.0, 1.0));
        s.inflation_radius = 0.4;
        assert_eq!(validate(&s), vec![Violation::WaypointNotFree { index: 0 }]);
    }

    #[test]
    fn speed_band_inversion_is_reported() {
        let mut s = toy();
        s.constraints.v_min = 2.0;
        assert_eq!(validate(&s), vec![Violation::Constraint { field: "v_min", reason: "exceeds v_max" }]);
    }

    #[test]
    fn intermediate_reward_must_be_positive() {
        let mut s = toy();
        s.waypoints[1].reward = 0.0;
        assert_eq!(validate(&s), vec![Violation::NonPositiveReward { index: 1 }]);
    }

    #[test]
    fn index_ranges_follow_fixed_end() {
        let mut s = toy();
        assert_eq!(s.intermediates(), 1..2);
        assert_eq!(s.end(), Some(2));
        s.fixed_end = false;
        s.waypoints[2].reward = 1.0;
        assert_eq!(s.intermediates(), 1..3);
        assert_eq!(s.end(), None);
        assert_eq!(s.max_reward(), 3.0);
        assert_eq!(s.reward_floor(), 0.5);
    }

    #[test]
    fn rect_distance() {
        let r = Rect::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(r.distance_to(Point::new(1.5, 1.5)), 0.0);
        assert_eq!(r.distance_to(Point::new(3.0, 1.5)), 1.0);
        assert!((r.distance_to(Point::new(3.0, 3.0)) - 2f64.sqrt()).abs() < 1e-15);
    }
}
