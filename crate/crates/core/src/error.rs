use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::Violation;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("goal is unreachable from start on the occupancy grid")]
    Unreachable,
    #[error("no obstacle-free path between waypoints {from} and {to}")]
    NoPath { from: usize, to: usize },
    #[error("path endpoint ({x}, {y}) is not in free space")]
    InvalidEndpoint { x: f64, y: f64 },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ClothoidError {
    #[error("G1 fit did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("G1 fit of segment {index} failed: {source}")]
    Segment { index: usize, source: Box<ClothoidError> },
    #[error("coincident endpoints cannot be joined by a clothoid")]
    CoincidentPoints,
    #[error("path needs at least two distinct points")]
    TooFewPoints,
    #[error("arc length {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("minimum speed {v_min} exceeds maximum speed {v_max}")]
    InfeasibleSpeedBand { v_min: f64, v_max: f64 },
    #[error("trajectory needs at least two samples")]
    TooFewSamples,
    #[error("path has zero length")]
    EmptyPath,
    #[error("neither a time window nor a positive maximum speed is available")]
    NoSpeedReference,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FlatnessError {
    #[error("sample {index} has zero speed")]
    ZeroSpeedSample { index: usize },
    #[error("flat output velocity vanishes at sample {index}; heading and turn rate are undefined")]
    DegenerateVelocity { index: usize },
    #[error("linear speed input is zero at sample {index}")]
    ZeroInput { index: usize },
    #[error("trace needs at least two samples")]
    TooFewSamples,
    #[error("quadruped map requires heading and heading rate")]
    MissingHeading,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{count} intermediate waypoints exceeds the enumeration limit of {limit}")]
    LimitExceeded { count: usize, limit: usize },
    #[error("label {label} outside the intermediate range {lo}..={hi}")]
    LabelOutOfRange { label: usize, lo: usize, hi: usize },
    #[error("truncation count {k} exceeds {max}")]
    CountOutOfRange { k: usize, max: usize },
    #[error("empty decision vector")]
    EmptyVector,
    #[error("rejection sampling found no free position for waypoint {index} after {attempts} attempts")]
    SamplingFailed { index: usize, attempts: usize },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration, {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: &'static str },
    #[error("could not start evaluation threads: {0}")]
    ThreadPool(String),
    #[error("could not build benchmark scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read scenario file {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("scenario file {}: {source}", path.display())]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}
