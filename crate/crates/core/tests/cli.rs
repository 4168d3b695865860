use std::path::Path;
use std::process::{Command, Output};

use qregress::{build_qubo, solve_exhaustive, Dataset, PrecisionVector, Qubo};
use serde_json::Value;

fn qregress(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qregress"))
        .args(args)
        .env_remove("QREGRESS_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gen(dir: &Path, extra: &[&str]) -> String {
    let csv = dir.join("ds.csv");
    let csv_s = csv.to_str().unwrap().to_string();
    let mut args = vec![
        "gen-data", "--n", "40", "--d", "1", "--seed", "7", "--out", &csv_s,
    ];
    args.extend_from_slice(extra);
    json(&qregress(&args));
    csv_s
}

#[test]
fn gen_then_solve_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &["--truth", "0.5,0.75"]);
    let truth = dir.path().join("ds.truth.json");
    assert!(truth.exists());
    let rep = json(&qregress(&[
        "solve",
        "--data",
        &csv,
        "--truth",
        truth.to_str().unwrap(),
        "--backend",
        "exhaustive",
    ]));
    assert_eq!(rep["weights"], serde_json::json!([0.5, 0.75]));
    assert_eq!(rep["hamming_distance"], 0);
    assert_eq!(rep["error"], 0.0);
    assert_eq!(rep["qubo_size"], 4);
    assert!(rep["solve_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn baseline_and_formulate_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &["--sigma", "0.2"]);
    let base = json(&qregress(&["baseline", "--data", &csv]));
    assert_eq!(base["weights"].as_array().unwrap().len(), 2);
    assert!(base["classical_time_ms"].is_number());

    let f = json(&qregress(&[
        "formulate",
        "--data",
        &csv,
        "--precision",
        "0.25,0.5,1",
        "--no-timing",
    ]));
    assert_eq!(f["qubo_size"], 6);
    assert!(f.get("formulate_time_ms").is_none());
    assert_eq!(f["qubo"]["b"].as_array().unwrap().len(), 6);
}

#[test]
fn exported_qubo_solves_like_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &["--sigma", "0.3"]);
    let out = dir.path().join("q.coo");
    let st = qregress(&[
        "export-qubo",
        "--data",
        &csv,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert!(st.stdout.is_empty());

    let p = PrecisionVector::new(vec![0.25, 0.5]).unwrap();
    let local = solve_exhaustive(&build_qubo(&Dataset::load_csv(&csv).unwrap(), &p).unwrap())
        .unwrap()
        .best;
    let imported = solve_exhaustive(&Qubo::load(&out).unwrap()).unwrap().best;
    assert_eq!(imported, local);

    let rep = json(&qregress(&[
        "solve",
        "--qubo",
        out.to_str().unwrap(),
        "--backend",
        "exhaustive",
    ]));
    assert_eq!(rep["energy"], local.energy);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &[]);
    let cfg = dir.path().join("solver.cfg");
    std::fs::write(&cfg, "# short run\nnum_reads = 7\nsweeps_per_read = 20\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let rep = json(&qregress(&["solve", "--data", &csv, "--config", cfg_s]));
    assert_eq!(rep["num_reads"], 7);
    let rep = json(&qregress(&[
        "solve",
        "--data",
        &csv,
        "--config",
        cfg_s,
        "--num-reads",
        "3",
    ]));
    assert_eq!(rep["num_reads"], 3);
}

#[test]
fn seed_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &[]);
    let via_flag = qregress(&[
        "solve",
        "--data",
        &csv,
        "--num-reads",
        "5",
        "--seed",
        "42",
        "--no-timing",
    ]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_qregress"))
        .args(["solve", "--data", &csv, "--num-reads", "5", "--no-timing"])
        .env("QREGRESS_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json(&via_flag)["seed"], 42);
    assert_eq!(via_flag.stdout, via_env.stdout);
}

#[test]
fn bench_csv_has_fixed_columns() {
    let out = qregress(&[
        "bench-n",
        "--n-values",
        "512,1024",
        "--runs",
        "2",
        "--num-reads",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = qregress::parse_report_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].scale_param, 1024);
    assert_eq!(
        text.lines().next().unwrap(),
        qregress::bench::CSV_COLUMNS.join(",")
    );
}

#[test]
fn recover_reports_strata() {
    let rep = json(&qregress(&[
        "recover",
        "--runs",
        "20",
        "--backend",
        "exhaustive",
        "--truth",
        "0.5,0.75",
    ]));
    assert_eq!(rep["runs"], 20);
    assert_eq!(rep["recovered_runs"], 20);
    assert_eq!(rep["fit_fraction"], 1.0);
}

#[test]
fn failures_exit_1_with_message() {
    let out = qregress(&["baseline", "--data", "/nonexistent/ds.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.starts_with("qregress: ") && err.contains("/nonexistent/ds.csv"),
        "{err}"
    );

    let dir = tempfile::tempdir().unwrap();
    let csv = gen(dir.path(), &[]);
    let out = qregress(&["solve", "--data", &csv, "--precision", "0.3,0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = qregress(&[
        "bench-d",
        "--d-values",
        "16",
        "--n",
        "64",
        "--backend",
        "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nothing_written_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = qregress(&[
        "baseline",
        "--data",
        "/nonexistent/ds.csv",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qregress(&[]).status.code(), Some(2));
    assert_eq!(
        qregress(&["solve", "--num-reads", "many", "--data", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qregress(&["export-qubo"]).status.code(), Some(2));
}

#[test]
fn help_lists_subcommands_and_flags() {
    let out = qregress(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "gen-data",
        "formulate",
        "solve",
        "baseline",
        "recover",
        "bench-n",
        "bench-d",
        "export-qubo",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let out = qregress(&["solve", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in [
        "--backend",
        "--num-reads",
        "--sweeps",
        "--seed",
        "--fault-prob",
        "--no-timing",
        "--threads",
    ] {
        assert!(text.contains(flag), "{flag} missing from solve --help");
    }
    assert_eq!(qregress(&["--version"]).status.code(), Some(0));
}
