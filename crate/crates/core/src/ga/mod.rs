//! Genetic search over variable-length waypoint sequences.

mod crossover;
mod dtw;
mod selection;
mod sequence;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clothoid::fmt_sig;
use crate::error::GaError;
use crate::fitness::{EvaluatedIndividual, Evaluator, PenaltyWeights};
use crate::scenario::Scenario;

pub use crossover::{crossover_subsequence, crossover_warp, crossover_warp_with, subsequence_insert, BETA_RANGE};
pub use dtw::{dtw_by, dtw_warp, WarpedAlignment};
pub use selection::{rank_weights, select_and_breed, sort_by_fitness, stochastic_universal_sampling, BreedPlan};
pub use sequence::{
    init_population, intermediates, is_valid_sequence, mutate, random_sequence, with_endpoints, WaypointSequence,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Explicit population size; `None` means `beta_p` times the waypoint
    /// count.
    pub population_size: Option<usize>,
    pub p_m: f64,
    pub elite: f64,
    pub truncation: f64,
    /// Share of offspring produced by the warping crossover.
    pub crossover_mix: f64,
    pub iter_max: usize,
    pub convergence_window: usize,
    pub convergence_epsilon: f64,
    pub beta_p: f64,
    pub seed: u64,
    /// Evaluation threads; results do not depend on this.
    pub threads: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: None,
            p_m: 0.1,
            elite: 0.01,
            truncation: 0.2,
            crossover_mix: 0.5,
            iter_max: 500,
            convergence_window: 50,
            convergence_epsilon: 1e-6,
            beta_p: 20.0,
            seed: 0,
            threads: 1,
        }
    }
}

pub const MIN_POPULATION: usize = 4;

impl GaConfig {
    pub fn population_for(&self, scenario: &Scenario) -> usize {
        self.population_size
            .unwrap_or_else(|| (self.beta_p * scenario.waypoint_count() as f64).round() as usize)
            .max(MIN_POPULATION)
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(GaError::InvalidConfig { field: name, reason: "must lie in [0, 1]" })
            }
        };
        unit("p_m", self.p_m)?;
        unit("elite", self.elite)?;
        unit("truncation", self.truncation)?;
        unit("crossover_mix", self.crossover_mix)?;
        if self.elite + self.truncation >= 1.0 {
            return Err(GaError::InvalidConfig { field: "elite", reason: "elite + truncation must be below 1" });
        }
        if self.population_size.is_some_and(|c| c < MIN_POPULATION) {
            return Err(GaError::InvalidConfig { field: "population_size", reason: "must be at least 4" });
        }
        if !(self.beta_p > 0.0) {
            return Err(GaError::InvalidConfig { field: "beta_p", reason: "must be positive" });
        }
        if !(self.convergence_epsilon >= 0.0) {
            return Err(GaError::InvalidConfig { field: "convergence_epsilon", reason: "must be nonnegative" });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness found so far.
    pub best_h: f64,
    /// Mean fitness of this generation.
    pub mean_h: f64,
    pub best_reward: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct GaResult {
    pub best: EvaluatedIndividual,
    pub history: Vec<GenerationStats>,
    pub population_size: usize,
    pub evaluations: usize,
    /// Wall time from the start of the run until the final best appeared.
    pub time_to_best: Duration,
    pub converged: bool,
}

/// Runs the GA with a fresh evaluator and an RNG seeded from the config.
pub fn run_ga(scenario: &Scenario, config: &GaConfig, weights: &PenaltyWeights) -> Result<GaResult, GaError> {
    let evaluator = Evaluator::new(scenario, *weights);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_ga_with(&evaluator, config, &mut rng)
}

/// Main loop: evaluate, track the global best, breed, until `iter_max`
/// generations or until the best fitness improves by less than
/// `convergence_epsilon` over `convergence_window` generations.
///
/// All random draws happen in the breeding step, so the result depends only
/// on the RNG state and not on `threads`.
pub fn run_ga_with<R: Rng + ?Sized>(
    evaluator: &Evaluator<'_>,
    config: &GaConfig,
    rng: &mut R,
) -> Result<GaResult, GaError> {
    config.validate()?;
    let started = Instant::now();
    let scenario = evaluator.scenario();
    let size = config.population_for(scenario);
    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| GaError::ThreadPool(e.to_string()))?,
        )
    } else {
        None
    };
    let evaluate = |pop: &[WaypointSequence]| -> Vec<EvaluatedIndividual> {
        match &pool {
            Some(p) => p.install(|| pop.par_iter().map(|s| evaluator.evaluate(s)).collect()),
            None => pop.iter().map(|s| evaluator.evaluate(s)).collect(),
        }
    };

    let mut population = init_population(scenario, size, rng);
    let mut evaluated = evaluate(&population);
    let mut evaluations = evaluated.len();
    let mut best = evaluated[0].clone();
    let mut time_to_best = started.elapsed();
    let mut history = Vec::new();
    let mut converged = false;

    for generation in 0..=config.iter_max {
        for ind in &evaluated {
            if ind.fitness < best.fitness {
                best = ind.clone();
                time_to_best = started.elapsed();
            }
        }
        let mean_h = evaluated.iter().map(|e| e.fitness).sum::<f64>() / evaluated.len() as f64;
        history.push(GenerationStats {
            generation,
            best_h: best.fitness,
            mean_h,
            best_reward: best.report.reward,
            feasible: best.is_feasible(),
        });
        if generation >= config.convergence_window {
            let past = history[generation - config.convergence_window].best_h;
            if past - best.fitness < config.convergence_epsilon {
                converged = true;
                break;
            }
        }
        if generation == config.iter_max {
            break;
        }
        population = select_and_breed(&evaluated, config, scenario, rng);
        evaluated = evaluate(&population);
        evaluations += evaluated.len();
    }

    Ok(GaResult { best, history, population_size: size, evaluations, time_to_best, converged })
}

/// CSV with header `generation,best_h,mean_h,best_reward,feasible`.
pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_h,mean_h,best_reward,feasible\n");
    for g in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            g.generation,
            fmt_sig(g.best_h),
            fmt_sig(g.mean_h),
            fmt_sig(g.best_reward),
            u8::from(g.feasible)
        );
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use fixtures::scattered;

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { p_m: 1.5, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { elite: 0.5, truncation: 0.5, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { population_size: Some(3), ..GaConfig::default() }.validate().is_err());
    }

    #[test]
    fn no_intermediates_returns_endpoints() {
        let s = scattered(0, true);
        let cfg = GaConfig { population_size: Some(8), iter_max: 5, ..GaConfig::default() };
        let r = run_ga(&s, &cfg, &PenaltyWeights::default()).unwrap();
        assert_eq!(r.best.sequence, vec![0, 1]);
        assert_eq!(r.best.fitness, 1.0);
    }

    #[test]
    fn single_intermediate_is_found_quickly() {
        let s = scattered(1, true);
        let cfg = GaConfig { population_size: Some(8), iter_max: 5, seed: 4, ..GaConfig::default() };
        let r = run_ga(&s, &cfg, &PenaltyWeights::default()).unwrap();
        assert_eq!(r.best.sequence, vec![0, 1, 2]);
        assert_eq!(r.best.fitness, 1.0);
    }

    #[test]
    fn history_is_monotone_and_reproducible() {
        let s = scattered(5, false);
        let cfg = GaConfig { population_size: Some(20), iter_max: 30, seed: 11, ..GaConfig::default() };
        let a = run_ga(&s, &cfg, &PenaltyWeights::default()).unwrap();
        let b = run_ga(&s, &cfg, &PenaltyWeights::default()).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best, b.best);
        for w in a.history.windows(2) {
            assert!(w[1].best_h <= w[0].best_h);
        }
        let threaded = run_ga(&s, &GaConfig { threads: 2, ..cfg }, &PenaltyWeights::default()).unwrap();
        assert_eq!(threaded.history, a.history);
    }

    #[test]
    fn history_csv_format() {
        let h = [GenerationStats { generation: 0, best_h: 1.5, mean_h: 2.25, best_reward: 3.0, feasible: true }];
        assert_eq!(history_csv(&h), "generation,best_h,mean_h,best_reward,feasible\n0,1.5,2.25,3,1\n");
    }
}
