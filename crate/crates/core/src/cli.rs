//! Command-line front end: `plan`, `oracle` and `bench`.
//!
//! Exit codes: 0 when the reported best sequence is feasible, 2 when it
//! violates a constraint, 1 on any error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::fitness::{EvalOptions, EvaluatedIndividual, Evaluator, PenaltyWeights, Plan, ViolationReport};
use crate::flatness::QuadrupedMap;
use crate::ga::{history_csv, run_ga_with, GaConfig};
use crate::oracle::{brute_force_with, complexity_sweep, SweepOptions};
use crate::scenario::{load_scenario, save_scenario, RobotModel, Scenario, ScenarioDocument, DEFAULT_GRID_RESOLUTION};

/// Environment variable read when `--threads` is not given.
pub const THREADS_ENV: &str = "REWARD_ROUTE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reward-route", version, about = "Reward-maximizing waypoint sequencing for mobile robots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the genetic planner on a scenario file.
    Plan(PlanArgs),
    /// Find the exact optimum by enumeration (at most 8 intermediates).
    Oracle(OracleArgs),
    /// Time the planner on random scenarios of growing size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GaFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub pop_size: Option<usize>,
    /// Mutation probability.
    #[arg(long)]
    pub pm: Option<f64>,
    /// Elite fraction.
    #[arg(long)]
    pub elite: Option<f64>,
    /// Truncated fraction.
    #[arg(long)]
    pub trunc: Option<f64>,
    /// Share of offspring from the warping crossover.
    #[arg(long)]
    pub cmix: Option<f64>,
    /// Evaluation threads; falls back to REWARD_ROUTE_THREADS, then 1.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub ga: GaFlags,
    /// Also write plot.svg.
    #[arg(long)]
    pub plot: bool,
    /// Quadruped inputs from the rotated world velocity instead of the
    /// published map.
    #[arg(long)]
    pub standard_body_twist: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Accepted for symmetry with `plan`; the oracle uses no randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub standard_body_twist: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Waypoint counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Grid resolution of the generated scenarios in meters.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    pub resolution: f64,
    #[command(flatten)]
    pub ga: GaFlags,
}

/// How a successful command ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Feasible => 0,
            Self::Infeasible => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRef {
    pub file: String,
    pub samples: usize,
}

/// Contents of `solution.json` and `oracle.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    /// SHA-256 of the canonical scenario JSON embedded below.
    pub scenario_digest: String,
    pub scenario: ScenarioDocument,
    pub sequence: Vec<usize>,
    pub fitness: f64,
    pub reward: f64,
    pub t_f: f64,
    pub path_length: f64,
    pub feasible: bool,
    pub violations: ViolationReport,
    pub trajectory: Option<TrajectoryRef>,
    pub config: Option<GaConfig>,
    pub weights: PenaltyWeights,
    pub quadruped_map: QuadrupedMap,
    pub seed: Option<u64>,
    pub generations: Option<usize>,
    pub evaluations: usize,
}

impl SolutionDocument {
    fn new(scenario: &Scenario, best: &EvaluatedIndividual, weights: PenaltyWeights, map: QuadrupedMap) -> Self {
        let r = &best.report;
        Self {
            scenario_digest: scenario_digest(scenario),
            scenario: ScenarioDocument::from_scenario(scenario),
            sequence: best.sequence.clone(),
            fitness: best.fitness,
            reward: r.reward,
            t_f: r.t_f,
            path_length: r.path_length,
            feasible: best.is_feasible(),
            violations: r.clone(),
            trajectory: None,
            config: None,
            weights,
            quadruped_map: map,
            seed: None,
            generations: None,
            evaluations: 0,
        }
    }

    /// Re-runs the evaluation pipeline on the stored scenario and sequence.
    pub fn reevaluate(&self) -> EvaluatedIndividual {
        let scenario = self.scenario.clone().into_scenario();
        let options = EvalOptions { quadruped_map: self.quadruped_map };
        Evaluator::uncached(&scenario, self.weights, options).evaluate(&self.sequence)
    }
}

/// Hex SHA-256 of the canonical JSON form of `scenario`.
pub fn scenario_digest(scenario: &Scenario) -> String {
    Sha256::digest(save_scenario(scenario).as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    load_scenario(&text).map_err(|source| CliError::Scenario { path: path.to_path_buf(), source })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path, source })
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })
}

fn threads(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a count")))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn ga_config(flags: &GaFlags) -> Result<GaConfig, CliError> {
    let d = GaConfig::default();
    let config = GaConfig {
        population_size: flags.pop_size.or(d.population_size),
        p_m: flags.pm.unwrap_or(d.p_m),
        elite: flags.elite.unwrap_or(d.elite),
        truncation: flags.trunc.unwrap_or(d.truncation),
        crossover_mix: flags.cmix.unwrap_or(d.crossover_mix),
        iter_max: flags.max_iter.unwrap_or(d.iter_max),
        seed: flags.seed,
        threads: threads(flags.threads)?,
        ..d
    };
    config.validate()?;
    Ok(config)
}

fn quadruped_map(standard: bool) -> QuadrupedMap {
    if standard {
        QuadrupedMap::StandardBodyTwist
    } else {
        QuadrupedMap::Published
    }
}

fn outcome(feasible: bool) -> Outcome {
    if feasible {
        Outcome::Feasible
    } else {
        Outcome::Infeasible
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("document serializes");
    s.push('\n');
    s
}

pub fn cmd_plan(args: &PlanArgs) -> Result<Outcome, CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let config = ga_config(&args.ga)?;
    let weights = PenaltyWeights::default();
    let map = quadruped_map(args.standard_body_twist);
    prepare_out(&args.out)?;

    let evaluator = Evaluator::with_options(&scenario, weights, EvalOptions { quadruped_map: map });
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let result = run_ga_with(&evaluator, &config, &mut rng)?;
    let plan = evaluator.plan(&result.best.sequence);

    let trajectory_csv = plan.trajectory.as_ref().map_or_else(|| "t,x,y,theta,kappa,v,a_lat\n".to_string(), |t| t.to_csv());
    let states_csv = plan.states.as_ref().map_or_else(|| empty_states_header(scenario.model), |s| s.to_csv());

    let mut doc = SolutionDocument::new(&scenario, &result.best, weights, map);
    doc.trajectory = Some(TrajectoryRef {
        file: "trajectory.csv".into(),
        samples: plan.trajectory.as_ref().map_or(0, |t| t.samples.len()),
    });
    doc.config = Some(config.clone());
    doc.seed = Some(config.seed);
    doc.generations = Some(result.history.len());
    doc.evaluations = result.evaluations;

    write(&args.out, "solution.json", &to_json(&doc))?;
    write(&args.out, "trajectory.csv", &trajectory_csv)?;
    write(&args.out, "states.csv", &states_csv)?;
    write(&args.out, "history.csv", &history_csv(&result.history))?;
    if args.plot {
        write(&args.out, "plot.svg", &plot_svg(&scenario, &plan))?;
    }
    println!(
        "best h={} reward={} t_f={} length={} feasible={} sequence={:?}",
        doc.fitness, doc.reward, doc.t_f, doc.path_length, doc.feasible, doc.sequence
    );
    Ok(outcome(doc.feasible))
}

fn empty_states_header(model: RobotModel) -> String {
    match model {
        RobotModel::DifferentialDrive => "t,x1,x2,x3,u1,u2,u1_dot\n".into(),
        RobotModel::Quadruped => "t,x1,x2,x3,u1,u2,u3\n".into(),
    }
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<Outcome, CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let weights = PenaltyWeights::default();
    let map = quadruped_map(args.standard_body_twist);
    let evaluator = Evaluator::with_options(&scenario, weights, EvalOptions { quadruped_map: map });
    let best = brute_force_with(&evaluator)?;
    prepare_out(&args.out)?;
    let mut doc = SolutionDocument::new(&scenario, &best, weights, map);
    doc.evaluations = evaluator.memo_len();
    write(&args.out, "oracle.json", &to_json(&doc))?;
    println!("optimum h={} reward={} feasible={} sequence={:?}", doc.fitness, doc.reward, doc.feasible, doc.sequence);
    Ok(outcome(doc.feasible))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Outcome, CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if args.counts.is_empty() {
        return Err(CliError::Usage("--counts needs at least one value".into()));
    }
    if !(args.resolution > 0.0) {
        return Err(CliError::Usage("--resolution must be positive".into()));
    }
    let config = ga_config(&args.ga)?;
    prepare_out(&args.out)?;
    let options = SweepOptions { resolution: args.resolution, weights: PenaltyWeights::default() };
    let result = complexity_sweep(&args.counts, args.trials, &config, config.seed, &options)?;
    write(&args.out, "bench.csv", &result.to_csv())?;
    match result.slope {
        Some(s) => println!("log-log slope {s}"),
        None => println!("log-log slope undefined"),
    }
    Ok(Outcome::Feasible)
}

/// Map, obstacles, waypoints with radius growing with reward, and the
/// trajectory as a polyline.
pub fn plot_svg(scenario: &Scenario, plan: &Plan) -> String {
    let env = &scenario.environment;
    let (w, h) = (env.x_max - env.x_min, env.y_max - env.y_min);
    let stroke = 0.004 * w.max(h);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        env.x_min,
        -env.y_max,
        w,
        h,
        (800.0 * h / w).round()
    );
    let _ = writeln!(svg, r#"<g transform="scale(1,-1)">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{w}" height="{h}" fill="white" stroke="black" stroke-width="{stroke}"/>"#,
        env.x_min, env.y_min
    );
    for o in &env.obstacles {
        let _ = writeln!(svg, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#555555"/>"##, o.x, o.y, o.width, o.height);
    }
    if let Some(t) = &plan.trajectory {
        let pts: Vec<String> = t.samples.iter().map(|s| format!("{:.4},{:.4}", s.position.x, s.position.y)).collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="{}"/>"##,
            pts.join(" "),
            2.0 * stroke
        );
    }
    let max_reward = scenario.waypoints.iter().map(|w| w.reward).fold(1.0, f64::max);
    let visited: std::collections::HashSet<usize> = plan.individual.sequence.iter().copied().collect();
    for (i, wp) in scenario.waypoints.iter().enumerate() {
        let endpoint = !scenario.is_intermediate(i);
        let r = if endpoint { 0.015 } else { 0.01 + 0.02 * wp.reward / max_reward } * w.max(h);
        let fill = match (endpoint, visited.contains(&i)) {
            (true, _) => "#2ca02c",
            (false, true) => "#d62728",
            (false, false) => "#bbbbbb",
        };
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="{r}" fill="{fill}"/>"#, wp.position.x, wp.position.y);
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}
