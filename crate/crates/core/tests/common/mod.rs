#![allow(dead_code)]

use rand::Rng;
use reward_route::geometry::Point;
use reward_route::scenario::{
    validate, ConstraintSet, DiffDriveParams, Environment, Rect, RobotModel, Scenario, Waypoint,
};

/// Obstacle-free 10 x 10 m field with `count` intermediates at random
/// positions, random integer rewards and loose constraints.
pub fn open_field<R: Rng>(count: usize, fixed_end: bool, rng: &mut R) -> Scenario {
    let mut waypoints = vec![Waypoint::new(0.5, 0.5, 0.0)];
    for _ in 0..count {
        let reward = rng.gen_range(1..=10) as f64;
        waypoints.push(Waypoint::new(rng.gen_range(0.5..9.5), rng.gen_range(0.5..9.5), reward));
    }
    if fixed_end {
        waypoints.push(Waypoint::new(9.5, 9.5, 0.0));
    }
    let mut constraints = ConstraintSet::new(1.0);
    constraints.t_max = Some(rng.gen_range(30.0..200.0));
    Scenario {
        environment: Environment { x_min: 0.0, x_max: 10.0, y_min: 0.0, y_max: 10.0, obstacles: vec![] },
        waypoints,
        fixed_end,
        constraints,
        model: RobotModel::DifferentialDrive,
        model_params: Some(DiffDriveParams::default()),
        grid_resolution: 0.1,
        inflation_radius: 0.0,
    }
}

/// 10 x 10 m map with a few rectangular blocks, a shared start and end
/// depot and 14 unit-reward waypoints; too many to visit in a 40 s mission
/// at 1 m/s.
pub fn depot_map() -> Scenario {
    let obstacles = vec![
        Rect::new(4.0, 4.0, 2.0, 2.0),
        Rect::new(1.5, 7.0, 3.0, 0.6),
        Rect::new(7.0, 1.0, 0.6, 3.0),
        Rect::new(7.0, 7.5, 2.0, 0.6),
    ];
    let sites = [
        (2.0, 2.5),
        (3.0, 4.5),
        (2.5, 6.0),
        (4.5, 3.0),
        (6.5, 3.5),
        (6.5, 5.5),
        (5.0, 6.8),
        (3.5, 8.5),
        (6.0, 8.8),
        (8.5, 6.0),
        (8.5, 3.0),
        (5.5, 1.5),
        (9.0, 9.0),
        (1.0, 9.2),
    ];
    let mut waypoints = vec![Waypoint::new(1.0, 1.0, 0.0)];
    waypoints.extend(sites.iter().map(|&(x, y)| Waypoint::new(x, y, 1.0)));
    waypoints.push(Waypoint::new(1.0, 1.0, 0.0));
    let mut constraints = ConstraintSet::new(1.0);
    constraints.t_max = Some(40.0);
    let scenario = Scenario {
        environment: Environment { x_min: 0.0, x_max: 10.0, y_min: 0.0, y_max: 10.0, obstacles },
        waypoints,
        fixed_end: true,
        constraints,
        model: RobotModel::DifferentialDrive,
        model_params: Some(DiffDriveParams::default()),
        grid_resolution: 0.1,
        inflation_radius: 0.2,
    };
    assert!(validate(&scenario).is_empty(), "{:?}", validate(&scenario));
    scenario
}

/// Random polyline of `points` vertices with consecutive vertices at least
/// `min_step` apart.
pub fn random_polyline<R: Rng>(points: usize, min_step: f64, rng: &mut R) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points);
    while out.len() < points {
        let p = Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        if out.last().map_or(true, |q| q.distance(p) >= min_step) {
            out.push(p);
        }
    }
    out
}
