//! Penalty-method fitness of a waypoint sequence.
//!
//! A sequence is routed, smoothed, timed and mapped to model states and
//! inputs; each constraint then contributes a normalized violation measure
//! `V >= 0`. The fitness is
//!
//! ```text
//! h = g_max / max(g, eps) + sum(alpha_i * V_i)
//! ```
//!
//! where `g` is the reward the sequence collects, `g_max` the reward of all
//! intermediate waypoints and `eps` half the smallest positive reward. Lower
//! is better and `h = 1` exactly when everything is collected feasibly.

use rustc_hash::FxHashMap;
use std::ops::AddAssign;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::clothoid::{
    build_through_cached, cruise_speed, parameterize_time_piecewise, refine_collision_cached, sample_segment,
    segment_intervals, ClothoidSegment, PiecewiseClothoid, SegmentCache, Trajectory, TrajectorySample,
};
use crate::error::FlatnessError;
use crate::flatness::{
    diffdrive_forward, flat_trace_from_trajectory, quadruped_forward, FlatTrace, QuadrupedMap, StateInputTrace,
};
use crate::memo::BoundedMemo;
use crate::scenario::{OccupancyGrid, RobotModel, Scenario};
use crate::search::{polyline_for_sequence, PairwiseCache, SequencePath};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub alpha_time: f64,
    pub alpha_dist: f64,
    pub alpha_obstacle: f64,
    pub alpha_input: f64,
    pub alpha_state: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self { alpha_time: 10.0, alpha_dist: 10.0, alpha_obstacle: 100.0, alpha_input: 10.0, alpha_state: 10.0 }
    }
}

impl PenaltyWeights {
    pub fn sum(&self) -> f64 {
        self.alpha_time + self.alpha_dist + self.alpha_obstacle + self.alpha_input + self.alpha_state
    }
}

/// Normalized constraint violations of one evaluated sequence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// `V1`: mission time overrun relative to `t_max`.
    pub time: f64,
    /// `V2`: path length overrun relative to `d_max`.
    pub distance: f64,
    /// `V3`: fraction of the path outside free space.
    pub obstacle: f64,
    /// Speed above `v_max`.
    pub speed: f64,
    /// Speed below `v_min`.
    pub min_speed: f64,
    /// Turn rate above `omega_max`.
    pub turn_rate: f64,
    /// Acceleration magnitude above `accel_max`.
    pub accel: f64,
    pub t_f: f64,
    pub path_length: f64,
    pub reward: f64,
    /// Set when a pipeline stage failed and maximal violations were charged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ViolationReport {
    /// `sum(alpha_i * V_i)`.
    pub fn penalty(&self, w: &PenaltyWeights) -> f64 {
        w.alpha_time * self.time
            + w.alpha_dist * self.distance
            + w.alpha_obstacle * self.obstacle
            + w.alpha_input * (self.speed + self.min_speed + self.turn_rate)
            + w.alpha_state * self.accel
    }

    pub fn is_feasible(&self) -> bool {
        self.failure.is_none()
            && [self.time, self.distance, self.obstacle, self.speed, self.min_speed, self.turn_rate, self.accel]
                .iter()
                .all(|&v| v == 0.0)
    }

    fn failed(reason: String) -> Self {
        Self { time: 1.0, distance: 1.0, obstacle: 1.0, speed: 1.0, accel: 1.0, failure: Some(reason), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedIndividual {
    pub sequence: Vec<usize>,
    pub fitness: f64,
    pub report: ViolationReport,
}

impl EvaluatedIndividual {
    pub fn is_feasible(&self) -> bool {
        self.report.is_feasible()
    }
}

/// `V1`; zero without a time window.
pub fn violation_time(t_f: f64, t_max: Option<f64>) -> f64 {
    relative_excess(t_f, t_max)
}

/// `V2`; zero without a distance budget.
pub fn violation_distance(d: f64, d_max: Option<f64>) -> f64 {
    relative_excess(d, d_max)
}

fn relative_excess(value: f64, bound: Option<f64>) -> f64 {
    match bound {
        Some(b) if value > b => (value - b) / b,
        _ => 0.0,
    }
}

/// `V3`: one minus the free share of the arc length, with each sample
/// interval weighted by the average free flag of its endpoints.
pub fn violation_obstacle(traj: &Trajectory, grid: &OccupancyGrid) -> f64 {
    let s = &traj.samples;
    let (Some(first), Some(last)) = (s.first(), s.last()) else { return 0.0 };
    let total = last.s - first.s;
    if !(total > 0.0) {
        return 0.0;
    }
    (1.0 - free_length(s, grid) / total).clamp(0.0, 1.0)
}

/// Arc length in free space, trapezoidal over the sample intervals.
pub fn free_length(samples: &[TrajectorySample], grid: &OccupancyGrid) -> f64 {
    let free: Vec<f64> = samples.iter().map(|p| if grid.is_free(p.position) { 1.0 } else { 0.0 }).collect();
    samples.windows(2).zip(free.windows(2)).map(|(p, f)| (p[1].s - p[0].s) * 0.5 * (f[0] + f[1])).sum()
}

/// `Vu`: trapezoidal integral of `max(|u| - u_bar, 0)` over time divided by
/// `t_f * u_bar`.
pub fn violation_input(times: &[f64], values: &[f64], u_bar: f64, t_f: f64) -> f64 {
    normalize(exceedance_area(times, values, u_bar), u_bar, t_f)
}

/// Lower-bound counterpart of [`violation_input`]: integral of
/// `max(u_min - |u|, 0)` over `t_f * u_min`.
pub fn violation_input_below(times: &[f64], values: &[f64], u_min: f64, t_f: f64) -> f64 {
    normalize(shortfall_area(times, values, u_min), u_min, t_f)
}

/// Trapezoidal integral of `max(|u| - bound, 0)` over time.
pub fn exceedance_area(times: &[f64], values: &[f64], bound: f64) -> f64 {
    trapezoid(times, values.iter().map(|u| (u.abs() - bound).max(0.0)))
}

/// Trapezoidal integral of `max(bound - |u|, 0)` over time.
pub fn shortfall_area(times: &[f64], values: &[f64], bound: f64) -> f64 {
    trapezoid(times, values.iter().map(|u| (bound - u.abs()).max(0.0)))
}

fn trapezoid(times: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    times.windows(2).zip(values.windows(2)).map(|(t, e)| (t[1] - t[0]) * 0.5 * (e[0] + e[1])).sum()
}

fn normalize(area: f64, bound: f64, t_f: f64) -> f64 {
    if t_f > 0.0 && bound > 0.0 {
        area / (t_f * bound)
    } else {
        0.0
    }
}

/// Unnormalized contributions of one segment to the violation measures.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct SegmentMeasures {
    free: f64,
    speed: f64,
    min_speed: f64,
    turn: f64,
    accel: f64,
}

impl AddAssign for SegmentMeasures {
    fn add_assign(&mut self, o: Self) {
        self.free += o.free;
        self.speed += o.speed;
        self.min_speed += o.min_speed;
        self.turn += o.turn;
        self.accel += o.accel;
    }
}

// Per-segment measures are dropped wholesale past this many entries.
const MEASURE_CACHE_LIMIT: usize = 1 << 20;

/// Knobs of the evaluation pipeline that are not part of the scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalOptions {
    pub quadruped_map: QuadrupedMap,
}

/// Everything produced while evaluating one sequence.
#[derive(Clone, Debug)]
pub struct Plan {
    pub polyline: SequencePath,
    pub path: Option<PiecewiseClothoid>,
    pub trajectory: Option<Trajectory>,
    pub flat: Option<FlatTrace>,
    pub states: Option<StateInputTrace>,
    pub individual: EvaluatedIndividual,
}

/// Shared evaluation state for one scenario: the rasterized grid, the
/// pairwise A* cache, memos of clothoid segments and of their measured
/// contributions, and a memo of finished evaluations. Safe to use from
/// several threads at once.
#[derive(Debug)]
pub struct Evaluator<'a> {
    scenario: &'a Scenario,
    grid: OccupancyGrid,
    weights: PenaltyWeights,
    options: EvalOptions,
    pairs: Option<PairwiseCache>,
    segments: Option<SegmentCache>,
    measures: Option<BoundedMemo<[u64; 7], Result<SegmentMeasures, FlatnessError>>>,
    memo: Option<RwLock<FxHashMap<Vec<usize>, Arc<EvaluatedIndividual>>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario, weights: PenaltyWeights) -> Self {
        Self::with_options(scenario, weights, EvalOptions::default())
    }

    pub fn with_options(scenario: &'a Scenario, weights: PenaltyWeights, options: EvalOptions) -> Self {
        Self {
            scenario,
            grid: scenario.grid(),
            weights,
            options,
            pairs: Some(PairwiseCache::new()),
            segments: Some(SegmentCache::new()),
            measures: Some(BoundedMemo::new(MEASURE_CACHE_LIMIT)),
            memo: Some(RwLock::new(FxHashMap::default())),
        }
    }

    /// Same pipeline with every cache disabled.
    pub fn uncached(scenario: &'a Scenario, weights: PenaltyWeights, options: EvalOptions) -> Self {
        Self { pairs: None, segments: None, measures: None, memo: None, ..Self::with_options(scenario, weights, options) }
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn weights(&self) -> &PenaltyWeights {
        &self.weights
    }

    /// Largest arc-length spacing between trajectory samples: half a cell.
    pub fn sample_spacing(&self) -> f64 {
        0.5 * self.grid.resolution()
    }

    /// Number of distinct sequences evaluated so far.
    pub fn memo_len(&self) -> usize {
        self.memo.as_ref().map_or(0, |m| m.read().len())
    }

    pub fn evaluate(&self, seq: &[usize]) -> EvaluatedIndividual {
        if let Some(memo) = &self.memo {
            if let Some(hit) = memo.read().get(seq) {
                return (**hit).clone();
            }
            let ind = self.run(seq, false).individual;
            memo.write().entry(seq.to_vec()).or_insert_with(|| Arc::new(ind.clone()));
            return ind;
        }
        self.run(seq, false).individual
    }

    /// `g_max / max(g, eps)`, or 1 when there is no reward to collect.
    pub fn reward_term(&self, g: f64) -> f64 {
        let g_max = self.scenario.max_reward();
        if g_max <= 0.0 {
            1.0
        } else {
            g_max / g.max(self.scenario.reward_floor())
        }
    }

    pub fn fitness_of(&self, report: &ViolationReport) -> f64 {
        let g = if report.failure.is_some() { 0.0 } else { report.reward };
        self.reward_term(g) + report.penalty(&self.weights)
    }

    /// Full pipeline: route, smooth, refine, time, map, measure. The
    /// trajectory and model traces are kept for export.
    pub fn plan(&self, seq: &[usize]) -> Plan {
        self.run(seq, true)
    }

    /// Flat outputs and model states and inputs along `traj`.
    pub fn model_states(&self, traj: &Trajectory) -> Result<(FlatTrace, StateInputTrace), FlatnessError> {
        let flat = flat_trace_from_trajectory(traj)?;
        let states = match self.scenario.model {
            RobotModel::DifferentialDrive => diffdrive_forward(&flat, Some(&self.scenario.diffdrive_params()))?,
            RobotModel::Quadruped => quadruped_forward(&flat, self.options.quadruped_map)?,
        };
        Ok((flat, states))
    }

    fn run(&self, seq: &[usize], export: bool) -> Plan {
        let scenario = self.scenario;
        let reward: f64 = seq.iter().filter(|&&i| scenario.is_intermediate(i)).map(|&i| scenario.waypoints[i].reward).sum();
        let fail = |polyline: SequencePath, reason: String| {
            let mut report = ViolationReport::failed(reason);
            report.reward = reward;
            let individual = EvaluatedIndividual { sequence: seq.to_vec(), fitness: self.fitness_of(&report), report };
            Plan { polyline, path: None, trajectory: None, flat: None, states: None, individual }
        };
        let empty = || SequencePath { path: crate::search::GridPath::from_points(vec![]), junctions: vec![] };

        let polyline = match polyline_for_sequence(&self.grid, seq, scenario, self.pairs.as_ref()) {
            Ok(p) => p,
            Err(e) => return fail(empty(), e.to_string()),
        };
        if polyline.path.length <= 0.0 {
            let report = ViolationReport { reward, ..ViolationReport::default() };
            let individual = EvaluatedIndividual { sequence: seq.to_vec(), fitness: self.fitness_of(&report), report };
            return Plan { polyline, path: None, trajectory: None, flat: None, states: None, individual };
        }

        let params: Vec<f64> = polyline.junctions.iter().map(|&j| j as f64).collect();
        let cache = self.segments.as_ref();
        let path = match build_through_cached(&polyline.path, &params, cache) {
            Ok(p) => refine_collision_cached(&p, &polyline.path, &self.grid, cache),
            Err(e) => return fail(polyline, e.to_string()),
        };
        let length = path.length();
        let (v, t_f) = match cruise_speed(length, &scenario.constraints) {
            Ok(vt) => vt,
            Err(e) => return fail(polyline, e.to_string()),
        };
        let mut total = SegmentMeasures::default();
        for seg in &path.segments {
            match self.segment_measures(seg, v) {
                Ok(m) => total += m,
                Err(e) => return fail(polyline, e.to_string()),
            }
        }
        let report = self.report(&total, length, t_f, reward);
        let individual = EvaluatedIndividual { sequence: seq.to_vec(), fitness: self.fitness_of(&report), report };
        if !export {
            return Plan { polyline, path: Some(path), trajectory: None, flat: None, states: None, individual };
        }

        let trajectory = match parameterize_time_piecewise(&path, &scenario.constraints, self.sample_spacing()) {
            Ok(t) => t,
            Err(e) => return fail(polyline, e.to_string()),
        };
        let (flat, states) = match self.model_states(&trajectory) {
            Ok(fs) => fs,
            Err(e) => return fail(polyline, e.to_string()),
        };
        Plan {
            polyline,
            path: Some(path),
            trajectory: Some(trajectory),
            flat: Some(flat),
            states: Some(states),
            individual,
        }
    }

    fn segment_measures(&self, seg: &ClothoidSegment, v: f64) -> Result<SegmentMeasures, FlatnessError> {
        let Some(memo) = &self.measures else { return self.measure_segment(seg, v) };
        let p = seg.start.position;
        let key = [p.x, p.y, seg.start.heading, seg.kappa0, seg.kappa_rate, seg.length, v].map(f64::to_bits);
        memo.get_or_insert_with(key, || self.measure_segment(seg, v))
    }

    fn measure_segment(&self, seg: &ClothoidSegment, v: f64) -> Result<SegmentMeasures, FlatnessError> {
        let c = &self.scenario.constraints;
        let samples = sample_segment(seg, v, segment_intervals(seg.length, self.sample_spacing()));
        let free = free_length(&samples, &self.grid);
        let local = Trajectory { samples, t_f: seg.length / v, total_length: seg.length };
        let (flat, states) = self.model_states(&local)?;
        let times = states.times();
        let (speed, turn): (Vec<f64>, Vec<f64>) = match &states {
            StateInputTrace::DiffDrive(s) => s.iter().map(|s| (s.u1, s.u2)).unzip(),
            StateInputTrace::Quadruped(s) => s.iter().map(|s| (s.u[0].hypot(s.u[1]), s.u[2])).unzip(),
        };
        let accel = c.accel_max.map_or(0.0, |a| {
            let mags: Vec<f64> = flat.samples.iter().map(|f| f.y_ddot.norm()).collect();
            exceedance_area(&times, &mags, a)
        });
        Ok(SegmentMeasures {
            free,
            speed: exceedance_area(&times, &speed, c.v_max),
            min_speed: if c.v_min > 0.0 { shortfall_area(&times, &speed, c.v_min) } else { 0.0 },
            turn: c.omega_max.map_or(0.0, |w| exceedance_area(&times, &turn, w)),
            accel,
        })
    }

    fn report(&self, m: &SegmentMeasures, length: f64, t_f: f64, reward: f64) -> ViolationReport {
        let c = &self.scenario.constraints;
        ViolationReport {
            time: violation_time(t_f, c.t_max),
            distance: violation_distance(length, c.d_max),
            obstacle: (1.0 - m.free / length).clamp(0.0, 1.0),
            speed: normalize(m.speed, c.v_max, t_f),
            min_speed: if c.v_min > 0.0 { normalize(m.min_speed, c.v_min, t_f) } else { 0.0 },
            turn_rate: c.omega_max.map_or(0.0, |w| normalize(m.turn, w, t_f)),
            accel: c.accel_max.map_or(0.0, |a| normalize(m.accel, a, t_f)),
            t_f,
            path_length: length,
            reward,
            failure: None,
        }
    }
}

/// One-shot evaluation with fresh caches.
pub fn evaluate_fitness(seq: &[usize], scenario: &Scenario, weights: &PenaltyWeights) -> EvaluatedIndividual {
    Evaluator::new(scenario, *weights).evaluate(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clothoid::TrajectorySample;
    use crate::geometry::Point;
    use crate::scenario::{ConstraintSet, DiffDriveParams, Environment, Rect, Waypoint};

    #[test]
    fn time_and_distance_closed_forms() {
        assert_eq!(violation_time(30.0, Some(40.0)), 0.0);
        assert_eq!(violation_time(40.0, Some(40.0)), 0.0);
        assert_eq!(violation_time(60.0, Some(40.0)), 0.5);
        assert_eq!(violation_time(60.0, None), 0.0);
        assert_eq!(violation_distance(7.5, Some(8.0)), 0.0);
        assert_eq!(violation_distance(8.5, Some(8.0)), 0.0625);
        assert_eq!(violation_distance(16.0, Some(8.0)), 1.0);
    }

    #[test]
    fn input_exceedance() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let at = vec![2.0; 101];
        assert_eq!(violation_input(&times, &at, 2.0, 10.0), 0.0);
        let double = vec![4.0; 101];
        assert!((violation_input(&times, &double, 2.0, 10.0) - 1.0).abs() < 1e-12);
        let half: Vec<f64> = times.iter().map(|&t| if t < 5.0 { 4.0 } else { 2.0 }).collect();
        assert!((violation_input(&times, &half, 2.0, 10.0) - 0.5).abs() <= 0.1 / 10.0);
    }

    fn straight_traj(points: usize, length: f64) -> Trajectory {
        let samples = (0..points)
            .map(|k| {
                let s = length * k as f64 / (points - 1) as f64;
                TrajectorySample {
                    t: s,
                    s,
                    position: Point::new(s, 0.5),
                    heading: 0.0,
                    curvature: 0.0,
                    speed: 1.0,
                    accel: 0.0,
                    accel_lat: 0.0,
                }
            })
            .collect();
        Trajectory { samples, t_f: length, total_length: length }
    }

    #[test]
    fn obstacle_fraction() {
        let n = 40;
        let free = OccupancyGrid::from_cells(Point::new(0.0, 0.0), 0.25, n, 4, vec![false; n * 4]);
        let blocked = OccupancyGrid::from_cells(Point::new(0.0, 0.0), 0.25, n, 4, vec![true; n * 4]);
        let traj = straight_traj(81, 9.9);
        assert_eq!(violation_obstacle(&traj, &free), 0.0);
        assert_eq!(violation_obstacle(&traj, &blocked), 1.0);
    }

    fn corridor(t_max: Option<f64>) -> Scenario {
        let mut constraints = ConstraintSet::new(1.0);
        constraints.t_max = t_max;
        Scenario {
            environment: Environment { x_min: 0.0, x_max: 6.0, y_min: 0.0, y_max: 2.0, obstacles: vec![] },
            waypoints: vec![
                Waypoint::new(0.5, 1.0, 0.0),
                Waypoint::new(2.5, 1.0, 2.0),
                Waypoint::new(4.5, 1.0, 1.0),
                Waypoint::new(5.5, 1.0, 0.0),
            ],
            fixed_end: true,
            constraints,
            model: RobotModel::DifferentialDrive,
            model_params: Some(DiffDriveParams::default()),
            grid_resolution: 0.1,
            inflation_radius: 0.0,
        }
    }

    #[test]
    fn full_reward_feasible_is_one() {
        let s = corridor(Some(40.0));
        let ind = evaluate_fitness(&[0, 1, 2, 3], &s, &PenaltyWeights::default());
        assert!(ind.is_feasible(), "{ind:?}");
        assert_eq!(ind.fitness, 1.0);
        assert!((ind.report.path_length - 5.0).abs() < 1e-9);
    }

    #[test]
    fn empty_sequence_uses_reward_floor() {
        let s = corridor(Some(40.0));
        let ind = evaluate_fitness(&[0, 3], &s, &PenaltyWeights::default());
        assert!(ind.is_feasible());
        assert_eq!(ind.fitness, 3.0 / 0.5);
    }

    #[test]
    fn time_overrun_penalty() {
        // Path of 5 m at v_max 1 needs 5 s; a 5/1.2 s window gives V1 = 0.2.
        let s = corridor(Some(5.0 / 1.2));
        let ind = evaluate_fitness(&[0, 1, 2, 3], &s, &PenaltyWeights::default());
        assert!((ind.report.time - 0.2).abs() < 1e-9, "{:?}", ind.report);
        assert!((ind.fitness - 3.0).abs() < 1e-8);
    }

    #[test]
    fn unreachable_waypoint_gets_maximal_penalty() {
        let mut s = corridor(Some(40.0));
        s.environment.obstacles.push(Rect::new(3.0, 0.0, 0.5, 2.0));
        let w = PenaltyWeights::default();
        let ind = evaluate_fitness(&[0, 1, 2, 3], &s, &w);
        assert!(ind.report.failure.is_some());
        assert_eq!(ind.fitness, 3.0 / 0.5 + w.sum());
    }

    #[test]
    fn caches_do_not_change_results() {
        let s = corridor(Some(8.0));
        let w = PenaltyWeights::default();
        let cached = Evaluator::new(&s, w);
        let plain = Evaluator::uncached(&s, w, EvalOptions::default());
        for seq in [vec![0, 2, 1, 3], vec![0, 1, 3], vec![0, 2, 1, 3], vec![0, 3]] {
            assert_eq!(cached.evaluate(&seq), plain.evaluate(&seq));
        }
        assert_eq!(cached.memo_len(), 3);
    }

    #[test]
    fn reversal_path_is_feasible_and_free() {
        let s = corridor(None);
        let w = PenaltyWeights::default();
        let plan = Evaluator::new(&s, w).plan(&[0, 2, 1, 3]);
        let traj = plan.trajectory.unwrap();
        assert!(traj.total_length > 7.0);
        assert_eq!(plan.individual.report.obstacle, 0.0, "{:?}", plan.individual.report);
    }
}
