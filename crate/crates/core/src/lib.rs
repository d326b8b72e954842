//! Reward-maximizing waypoint sequencing.
//!
//! A genetic algorithm chooses which weighted waypoints to visit and in what
//! order. Each candidate sequence is routed with A* on an occupancy grid,
//! smoothed into a G1 clothoid path, timed at constant speed and checked
//! against time, distance, obstacle, state and input limits through the
//! differential-flatness maps of the robot model.

pub mod cli;
pub mod clothoid;
pub mod error;
pub mod fitness;
pub mod flatness;
pub mod ga;
pub mod geometry;
mod memo;
pub mod oracle;
pub mod scenario;
pub mod search;
