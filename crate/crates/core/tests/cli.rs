mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reward_route::cli::SolutionDocument;
use reward_route::scenario::save_scenario;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reward-route"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("REWARD_ROUTE_THREADS").output().expect("binary runs")
}

fn scratch() -> TempDir {
    tempfile::tempdir().unwrap()
}

fn write_scenario(dir: &Path, count: usize, d_max: Option<f64>) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(count as u64);
    let mut scenario = common::open_field(count, true, &mut rng);
    scenario.grid_resolution = 0.2;
    scenario.constraints.t_max = None;
    scenario.constraints.d_max = d_max;
    let path = dir.join("scenario.json");
    fs::write(&path, save_scenario(&scenario)).unwrap();
    path
}

fn plan(scenario: &Path, out: &Path) -> Output {
    let (s, o) = (scenario.to_str().unwrap(), out.to_str().unwrap());
    run(&["plan", "--scenario", s, "--out", o, "--seed", "7", "--threads", "1", "--max-iter", "20"])
}

#[test]
fn plan_writes_all_outputs() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 3, None);
    let out = dir.join("out");
    let result = plan(&scenario, &out);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    for file in ["solution.json", "trajectory.csv", "states.csv", "history.csv"] {
        assert!(out.join(file).is_file(), "missing {file}");
    }
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x,y,theta,kappa,v,a_lat\n"));
    let states = fs::read_to_string(out.join("states.csv")).unwrap();
    assert!(states.starts_with("t,x1,x2,x3,u1,u2,u1_dot"));
}

#[test]
fn solution_reevaluates_to_stored_fitness() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 4, None);
    let out = dir.join("out");
    assert_eq!(plan(&scenario, &out).status.code(), Some(0));
    let doc: SolutionDocument = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    let again = doc.reevaluate();
    assert_eq!(again.sequence, doc.sequence);
    assert!((again.fitness - doc.fitness).abs() <= 1e-12 * doc.fitness.abs().max(1.0));
}

#[test]
fn plan_is_deterministic() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 5, None);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(plan(&scenario, &a).status.code(), Some(0));
    assert_eq!(plan(&scenario, &b).status.code(), Some(0));
    for file in ["solution.json", "history.csv", "trajectory.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn missing_scenario_names_the_path() {
    let tmp = scratch();
    let dir = tmp.path();
    let path = dir.join("nowhere.json");
    let result = run(&["plan", "--scenario", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("nowhere.json"));
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let tmp = scratch();
    let dir = tmp.path();
    let path = dir.join("bad.json");
    fs::write(&path, "{\"bounds\": 3").unwrap();
    let result = run(&["plan", "--scenario", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn infeasible_plan_exits_with_two() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 3, Some(0.5));
    let out = dir.join("out");
    let result = plan(&scenario, &out);
    assert_eq!(result.status.code(), Some(2), "{}", String::from_utf8_lossy(&result.stderr));
    let doc: SolutionDocument = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert!(!doc.feasible);
}

#[test]
fn oracle_refuses_large_scenarios() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 9, None);
    let result = run(&["oracle", "--scenario", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!dir.join("oracle.json").exists());
}

#[test]
fn oracle_writes_its_optimum() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 3, None);
    let result = run(&["oracle", "--scenario", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    let doc: SolutionDocument = serde_json::from_str(&fs::read_to_string(dir.join("oracle.json")).unwrap()).unwrap();
    assert_eq!(doc.sequence.len(), 5, "every site is worth visiting on an open field");
}

#[test]
fn bench_writes_rows_and_slope() {
    let tmp = scratch();
    let dir = tmp.path();
    let result = run(&[
        "bench", "--counts", "4,6", "--trials", "2", "--resolution", "0.25", "--max-iter", "5", "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let csv = fs::read_to_string(dir.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,trial,seed,best_h,best_reward,time_s");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("# slope,"));
}

#[test]
fn bench_rejects_zero_trials() {
    let tmp = scratch();
    let dir = tmp.path();
    let result = run(&["bench", "--counts", "4", "--trials", "0", "--out", dir.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn invalid_ga_flags_are_rejected() {
    let tmp = scratch();
    let dir = tmp.path();
    let scenario = write_scenario(dir, 3, None);
    let result = run(&["plan", "--scenario", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--pm", "1.5"]);
    assert_eq!(result.status.code(), Some(1));
}
