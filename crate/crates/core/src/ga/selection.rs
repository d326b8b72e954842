use rand::seq::SliceRandom;
use rand::Rng;

use crate::fitness::EvaluatedIndividual;
use crate::scenario::Scenario;

use super::crossover::{crossover_subsequence, crossover_warp};
use super::sequence::{mutate, WaypointSequence};
use super::GaConfig;

/// How one generation's slots are split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BreedPlan {
    pub truncated: usize,
    pub elites: usize,
    pub offspring: usize,
    pub warp_offspring: usize,
}

impl BreedPlan {
    pub fn new(population: usize, config: &GaConfig) -> Self {
        let c = population as f64;
        let truncated = ((config.truncation * c).floor() as usize).min(population.saturating_sub(1));
        let elites = ((config.elite * c).round() as usize).max(1).min(population - truncated);
        let offspring = population - elites;
        let warp_offspring = ((config.crossover_mix * offspring as f64).round() as usize).min(offspring);
        Self { truncated, elites, offspring, warp_offspring }
    }
}

/// Stochastic universal sampling: `n` evenly spaced pointers over the
/// cumulative weights, the first offset uniform in `[0, total / n)`.
pub fn stochastic_universal_sampling<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if n == 0 || weights.is_empty() || !(total > 0.0) {
        return Vec::new();
    }
    let step = total / n as f64;
    let start = rng.gen_range(0.0..step);
    let mut picks = Vec::with_capacity(n);
    let mut acc = weights[0];
    let mut idx = 0;
    for k in 0..n {
        let pointer = start + k as f64 * step;
        while pointer >= acc && idx + 1 < weights.len() {
            idx += 1;
            acc += weights[idx];
        }
        picks.push(idx);
    }
    picks
}

/// Rank weights `m, m - 1, ..., 1` for `m` individuals sorted best first.
pub fn rank_weights(m: usize) -> Vec<f64> {
    (0..m).map(|r| (m - r) as f64).collect()
}

/// Sorts best first; ties keep their previous order.
pub fn sort_by_fitness(population: &mut [EvaluatedIndividual]) {
    population.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

/// Next generation from an evaluated one: truncation, elitism, SUS parent
/// selection over the survivors, the two crossovers and mutation.
pub fn select_and_breed<R: Rng + ?Sized>(
    population: &[EvaluatedIndividual],
    config: &GaConfig,
    scenario: &Scenario,
    rng: &mut R,
) -> Vec<WaypointSequence> {
    let mut ranked = population.to_vec();
    sort_by_fitness(&mut ranked);
    let plan = BreedPlan::new(ranked.len(), config);
    let survivors = &ranked[..ranked.len() - plan.truncated];

    let mut next: Vec<WaypointSequence> = survivors[..plan.elites].iter().map(|e| e.sequence.clone()).collect();

    let mut parents = stochastic_universal_sampling(&rank_weights(survivors.len()), 2 * plan.offspring, rng);
    parents.shuffle(rng);
    for (k, pair) in parents.chunks_exact(2).enumerate() {
        let (a, b) = (&survivors[pair[0]].sequence, &survivors[pair[1]].sequence);
        let mut child = if k < plan.warp_offspring {
            crossover_warp(a, b, scenario, rng)
        } else {
            crossover_subsequence(a, b, scenario, rng)
        };
        mutate(&mut child, scenario, config.p_m, rng);
        next.push(child);
    }
    next
}
