//! Exhaustive reference solver, the truncation decoder and the scaling
//! benchmark.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clothoid::fmt_sig;
use crate::error::{GaError, OracleError};
use crate::fitness::{EvaluatedIndividual, Evaluator, PenaltyWeights};
use crate::ga::{run_ga_with, GaConfig, WaypointSequence};
use crate::geometry::Point;
use crate::scenario::{
    ConstraintSet, DiffDriveParams, Environment, Rect, RobotModel, Scenario, Waypoint, DEFAULT_GRID_RESOLUTION,
};

/// Largest intermediate count the enumeration accepts.
pub const ENUMERATION_LIMIT: usize = 8;
/// Rejection-sampling attempts per random waypoint.
pub const SAMPLING_ATTEMPTS: usize = 10_000;

/// Number of duplicate-free ordered selections of `0..=n` out of `n`.
pub fn sequence_count(n: usize) -> usize {
    let mut total = 0;
    let mut term = 1;
    for k in 0..=n {
        total += term;
        term *= n - k.min(n);
    }
    total
}

/// Every sequence over intermediates `1..=count`, shortest first and in
/// lexicographic order within a length.
pub fn enumerate_sequences(
    count: usize,
    fixed_end: bool,
) -> Result<impl Iterator<Item = WaypointSequence>, OracleError> {
    if count > ENUMERATION_LIMIT {
        return Err(OracleError::LimitExceeded { count, limit: ENUMERATION_LIMIT });
    }
    let end = fixed_end.then_some(count + 1);
    let mut out = Vec::with_capacity(sequence_count(count));
    let mut current = Vec::with_capacity(count);
    let mut used = vec![false; count + 1];
    for k in 0..=count {
        permutations(k, count, &mut current, &mut used, &mut |inner| {
            let mut seq = Vec::with_capacity(inner.len() + 2);
            seq.push(Scenario::START);
            seq.extend_from_slice(inner);
            seq.extend(end);
            out.push(seq);
        });
    }
    Ok(out.into_iter())
}

fn permutations(k: usize, n: usize, current: &mut Vec<usize>, used: &mut [bool], emit: &mut impl FnMut(&[usize])) {
    if current.len() == k {
        emit(current);
        return;
    }
    for label in 1..=n {
        if !used[label] {
            used[label] = true;
            current.push(label);
            permutations(k, n, current, used, emit);
            current.pop();
            used[label] = false;
        }
    }
}

fn better(a: &EvaluatedIndividual, b: &EvaluatedIndividual) -> bool {
    (a.fitness, a.report.path_length, a.sequence.len()) < (b.fitness, b.report.path_length, b.sequence.len())
}

/// Minimum-fitness sequence by exhaustive evaluation. Ties go to the shorter
/// path, then to the shorter sequence.
pub fn brute_force_best(scenario: &Scenario, weights: &PenaltyWeights) -> Result<EvaluatedIndividual, OracleError> {
    brute_force_with(&Evaluator::new(scenario, *weights))
}

pub fn brute_force_with(evaluator: &Evaluator<'_>) -> Result<EvaluatedIndividual, OracleError> {
    let scenario = evaluator.scenario();
    let mut best: Option<EvaluatedIndividual> = None;
    for seq in enumerate_sequences(scenario.intermediate_count(), scenario.end().is_some())? {
        let ind = evaluator.evaluate(&seq);
        if best.as_ref().is_none_or(|b| better(&ind, b)) {
            best = Some(ind);
        }
    }
    Ok(best.expect("enumeration yields at least the empty sequence"))
}

/// Truncation decoder: `x = (labels..., k)`. The first `k` labels with
/// repeats removed (first occurrence kept) become the intermediates.
pub fn decode_truncation(x: &[usize], count: usize, fixed_end: bool) -> Result<WaypointSequence, OracleError> {
    let Some((&k, labels)) = x.split_last() else {
        return Err(OracleError::EmptyVector);
    };
    if let Some(&label) = labels.iter().find(|&&l| l == 0 || l > count) {
        return Err(OracleError::LabelOutOfRange { label, lo: 1, hi: count });
    }
    let max = count.min(labels.len());
    if k > max {
        return Err(OracleError::CountOutOfRange { k, max });
    }
    let mut seq = vec![Scenario::START];
    for &l in &labels[..k] {
        if !seq[1..].contains(&l) {
            seq.push(l);
        }
    }
    if fixed_end {
        seq.push(count + 1);
    }
    Ok(seq)
}

/// Obstacle layout of the benchmark map: a 10 x 10 m field with scattered
/// blocks and open corridors between them.
pub fn benchmark_obstacles() -> Vec<Rect> {
    vec![
        Rect::new(1.8, 2.0, 1.6, 0.9),
        Rect::new(5.8, 1.0, 0.9, 2.4),
        Rect::new(1.2, 5.4, 2.4, 0.9),
        Rect::new(4.4, 4.1, 1.3, 1.3),
        Rect::new(7.2, 5.2, 1.5, 1.6),
        Rect::new(3.4, 7.8, 1.0, 1.3),
        Rect::new(6.3, 8.3, 2.0, 0.7),
    ]
}

/// Random benchmark instance: `count` intermediates placed uniformly over
/// free space, integer rewards in `1..=10`, fixed start and end in opposite
/// corners.
pub fn random_scenario<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Result<Scenario, OracleError> {
    random_scenario_at(count, DEFAULT_GRID_RESOLUTION, rng)
}

pub fn random_scenario_at<R: Rng + ?Sized>(count: usize, resolution: f64, rng: &mut R) -> Result<Scenario, OracleError> {
    let environment =
        Environment { x_min: 0.0, x_max: 10.0, y_min: 0.0, y_max: 10.0, obstacles: benchmark_obstacles() };
    let constraints = ConstraintSet {
        t_max: None,
        d_max: Some(200.0),
        v_max: 1.0,
        v_min: 0.1,
        omega_max: Some(0.5),
        accel_max: None,
    };
    let mut scenario = Scenario {
        environment,
        waypoints: vec![Waypoint::new(0.5, 0.5, 0.0)],
        fixed_end: true,
        constraints,
        model: RobotModel::DifferentialDrive,
        model_params: Some(DiffDriveParams::default()),
        grid_resolution: resolution,
        inflation_radius: 0.0,
    };
    let grid = scenario.grid();
    for index in 1..=count {
        let position = (0..SAMPLING_ATTEMPTS)
            .map(|_| Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .find(|&p| grid.is_free(p))
            .ok_or(OracleError::SamplingFailed { index, attempts: SAMPLING_ATTEMPTS })?;
        let reward = rng.gen_range(1..=10) as f64;
        scenario.waypoints.push(Waypoint { position, reward });
    }
    scenario.waypoints.push(Waypoint::new(9.5, 9.5, 0.0));
    Ok(scenario)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub best_h: f64,
    pub best_reward: f64,
    /// Wall time until the final best sequence was found.
    pub time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln time` against `ln n`; `None` with fewer
    /// than two distinct counts.
    pub slope: Option<f64>,
}

/// Deterministic per-row seed.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add((row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub resolution: f64,
    pub weights: PenaltyWeights,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { resolution: DEFAULT_GRID_RESOLUTION, weights: PenaltyWeights::default() }
    }
}

/// Runs the GA on `trials` random scenarios per waypoint count and fits the
/// log-log growth of the time to the best solution.
pub fn complexity_sweep(
    counts: &[usize],
    trials: usize,
    config: &GaConfig,
    seed: u64,
    options: &SweepOptions,
) -> Result<BenchResult, GaError> {
    let mut rows = Vec::with_capacity(counts.len() * trials);
    for &n in counts {
        for trial in 0..trials {
            let s = row_seed(seed, rows.len());
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let scenario = random_scenario_at(n, options.resolution, &mut rng)
                .map_err(|e| GaError::Scenario(e.to_string()))?;
            let evaluator = Evaluator::new(&scenario, options.weights);
            let cfg = GaConfig { seed: s, ..config.clone() };
            let result = run_ga_with(&evaluator, &cfg, &mut rng)?;
            rows.push(BenchRow {
                n,
                trial,
                seed: s,
                best_h: result.best.fitness,
                best_reward: result.best.report.reward,
                time_s: result.time_to_best.as_secs_f64(),
            });
        }
    }
    let slope = loglog_slope(&rows);
    Ok(BenchResult { rows, slope })
}

/// Ordinary least squares slope through `(ln n, ln time_s)`.
pub fn loglog_slope(rows: &[BenchRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.time_s > 0.0 && r.n > 0).map(|r| ((r.n as f64).ln(), r.time_s.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl BenchResult {
    /// CSV `n,trial,seed,best_h,best_reward,time_s`, closed by a
    /// `# slope,<value>` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,trial,seed,best_h,best_reward,time_s\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                r.trial,
                r.seed,
                fmt_sig(r.best_h),
                fmt_sig(r.best_reward),
                fmt_sig(r.time_s)
            );
        }
        let slope = self.slope.map_or_else(|| "nan".to_string(), fmt_sig);
        let _ = writeln!(out, "# slope,{slope}");
        out
    }
}
