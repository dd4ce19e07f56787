//! Harness-level integration tests: sweep reproducibility, file round
//! trips, and end-to-end runs of the `rssp` binary.

use std::process::Command;

use rssp::experiments::{aggregate, run_sweep, Method, SweepConfig};
use rssp::io::{emit_records, read_records, OutputFormat};
use rssp_core::instance::{DistributionSpec, Family, Support};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rssp"))
}

fn small_config() -> SweepConfig {
    let dist = DistributionSpec::new(Family::Uniform, Support::Symmetric, 1_000_000);
    let mut config = SweepConfig::new(dist, 30, 4, vec![8, 16]);
    config.methods = vec![Method::Mitm, Method::PlainBeam, Method::Sa];
    config.master_seed = 99;
    config
}

#[test]
fn sweep_round_trips_through_both_formats() {
    let records = run_sweep(&small_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [("r.csv", OutputFormat::Csv), ("r.jsonl", OutputFormat::Jsonl)] {
        let path = dir.path().join(name);
        emit_records(&records, &path, format).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let mut one = small_config();
    one.parallelism = 1;
    let mut four = small_config();
    four.parallelism = 4;
    let mut a = run_sweep(&one).unwrap();
    let mut b = run_sweep(&four).unwrap();
    for r in a.iter_mut().chain(b.iter_mut()) {
        r.elapsed_ns = 0;
    }
    assert_eq!(a, b);
}

#[test]
fn methods_never_beat_the_oracle_on_the_corpus() {
    let mut config = small_config();
    config.methods = vec![
        Method::Exact,
        Method::Mitm,
        Method::MitmEqui,
        Method::PlainBeam,
        Method::BoundedMitm,
        Method::Sa,
        Method::Ga,
        Method::Pso,
        Method::Tabu,
        Method::Aoa,
    ];
    config.n = 14;
    let records = run_sweep(&config).unwrap();
    let rows = aggregate(&records);
    let oracle_mean = |w: usize| {
        rows.iter()
            .find(|r| r.method == "exact" && r.width == w)
            .unwrap()
            .mean_error
    };
    for (w, trial) in [(8usize, 0u64), (16, 1)] {
        let _ = trial;
        let oracle = oracle_mean(w);
        for row in rows.iter().filter(|r| r.width == w) {
            assert!(
                row.mean_error >= oracle - 1e-9,
                "{} mean below oracle at w={w}",
                row.method
            );
        }
    }
    // Per-trial too: every error is at least the oracle's on that instance.
    for w in [8usize, 16] {
        for trial in 0..4u64 {
            let group: Vec<_> = records
                .iter()
                .filter(|r| r.width == w && r.trial_id == trial)
                .collect();
            let oracle = group.iter().find(|r| r.method == "exact").unwrap().error;
            for r in &group {
                assert!(r.error >= oracle, "{} below oracle", r.method);
            }
        }
    }
}

#[test]
fn mitm_usually_beats_the_plain_beam_paired() {
    use rssp_core::instance::{Instance, TargetRule};
    use rssp_core::mitm::{mitm_solve, PhaseAVariant, SplitRule};

    let dist = DistributionSpec::new(Family::Uniform, Support::Symmetric, 1_000_000_000_000);
    let trials = 200u64;
    let mut wins = 0;
    for seed in 0..trials {
        let inst = Instance::generate(&dist, 200, TargetRule::RandomSubset, 70_000 + seed).unwrap();
        let mitm = mitm_solve(&inst, 64, SplitRule::log_default(), seed, PhaseAVariant::BucketRandom)
            .unwrap();
        let (plain_best, _) =
            rssp_core::beam::closest_beam_search(&inst.items, inst.target, 64).unwrap();
        if mitm.error <= inst.error_of(plain_best) {
            wins += 1;
        }
    }
    assert!(wins * 2 >= trials, "mitm beat the plain beam in only {wins}/{trials} runs");
}

#[test]
fn cli_solve_emits_result_json() {
    let out = bin()
        .args([
            "solve", "--method", "mitm", "--dist", "uniform", "--n", "60", "--B", "1000000",
            "--w", "16", "--seed", "3", "--reconstruct",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "mitm");
    assert!(v["error"].as_u64().is_some());
    assert!(v["best_total"].is_i64());
    assert!(v["subset"].is_array());
    assert!(v["config"]["n_left"].is_u64());
    // The stderr diagnostics echo the resolved config as JSON.
    let first_line = String::from_utf8_lossy(&out.stderr);
    let echo: serde_json::Value =
        serde_json::from_str(first_line.lines().next().unwrap()).unwrap();
    assert_eq!(echo["command"], "solve");
}

#[test]
fn cli_split_echo_matches_resolved_split_point() {
    let out = bin()
        .args([
            "solve", "--method", "plain", "--n", "200", "--w", "64", "--split", "logw:4",
            "--B", "1000000", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["n_left"], 24);
}

#[test]
fn cli_bench_writes_expected_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let out = bin()
        .args([
            "bench", "--dist", "uniform", "--n", "24", "--B", "100000", "--trials", "2",
            "--w-grid", "8,16", "--method", "mitm", "--seed", "7", "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(&path).unwrap();
    assert_eq!(records.len(), 4);
    // Re-running the same invocation reproduces the records (timings aside).
    let path2 = dir.path().join("bench2.csv");
    let out2 = bin()
        .args([
            "bench", "--dist", "uniform", "--n", "24", "--B", "100000", "--trials", "2",
            "--w-grid", "8,16", "--method", "mitm", "--seed", "7", "--out",
            path2.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out2.status.success());
    let mut a = records;
    let mut b = read_records(&path2).unwrap();
    for r in a.iter_mut().chain(b.iter_mut()) {
        r.elapsed_ns = 0;
    }
    assert_eq!(a, b);
}

#[test]
fn cli_bench_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("sweep.json");
    let config = serde_json::json!({
        "distribution": {"family": "uniform", "support": "symmetric", "B": 100000, "nu": 2},
        "n": 20,
        "trials": 2,
        "w_grid": [8],
        "split": "logw:4",
        "target": "random",
        "methods": ["mitm", "plain_beam"],
        "master_seed": 13,
        "parallelism": 1
    });
    std::fs::write(&config_path, config.to_string()).unwrap();
    let out_path = dir.path().join("records.csv");
    let out = bin()
        .args([
            "bench", "--config", config_path.to_str().unwrap(), "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(&out_path).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.n == 20 && r.seed != 0));
}

#[test]
fn cli_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let status = bin()
        .args([
            "bench", "--dist", "uniform", "--n", "60", "--B", "100000000", "--trials", "10",
            "--w-grid", "4,8,16,32", "--method", "mitm", "--seed", "11", "--out",
            path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin().args(["fit", path.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["fit"]["slope"].is_f64());
    assert!(v["fit"]["c"].as_f64().unwrap() > 0.0);
}

#[test]
fn cli_coverage_reports_bound() {
    let out = bin()
        .args([
            "coverage", "--w", "16", "--B", "1000000", "--trials", "50", "--delta", "0.05",
            "--seed", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &v["reports"][0];
    assert_eq!(report["w"], 16);
    assert!(report["j_delta"].as_f64().unwrap() > 0.0);
    assert!(report["exceed_fraction"].as_f64().unwrap() <= 0.05);
}

#[test]
fn cli_generate_produces_a_valid_instance() {
    let out = bin()
        .args([
            "generate", "--dist", "bimodal", "--support", "nonnegative", "--n", "50",
            "--B", "10000", "--seed", "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let items: Vec<i64> = serde_json::from_value(v["items"].clone()).unwrap();
    assert_eq!(items.len(), 50);
    assert!(items.iter().all(|&x| (0..=10_000).contains(&x)));
    // Planted subset reproduces the target.
    let planted: Vec<usize> = serde_json::from_value(v["planted"].clone()).unwrap();
    let t = v["target"].as_i64().unwrap();
    assert_eq!(planted.iter().map(|&i| items[i]).sum::<i64>(), t);
}

#[test]
fn cli_env_seed_overrides_flag() {
    let with_flag = bin()
        .args(["generate", "--n", "10", "--B", "1000", "--seed", "1"])
        .output()
        .unwrap();
    let with_env = bin()
        .args(["generate", "--n", "10", "--B", "1000", "--seed", "1"])
        .env("RSSP_SEED", "2")
        .output()
        .unwrap();
    let direct = bin()
        .args(["generate", "--n", "10", "--B", "1000", "--seed", "2"])
        .output()
        .unwrap();
    assert_ne!(with_flag.stdout, with_env.stdout);
    assert_eq!(with_env.stdout, direct.stdout);
}

#[test]
fn cli_usage_errors_exit_two() {
    let out = bin().args(["solve", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_solver_errors_exit_one_with_json_diagnostic() {
    // The trimming scheme rejects symmetric (negative) items.
    let out = bin()
        .args([
            "solve", "--method", "fptas", "--dist", "uniform", "--support", "symmetric",
            "--n", "20", "--B", "1000", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn cli_vector_solve_works() {
    let out = bin()
        .args([
            "solve", "--method", "mitm", "--d", "2", "--n", "40", "--B", "1000000",
            "--w", "32", "--seed", "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "vector_mitm");
    assert_eq!(v["best_total"].as_array().unwrap().len(), 2);
}
