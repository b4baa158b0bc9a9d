//! End-to-end runs of the `nml` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nml(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nml"))
        .args(args)
        .current_dir(dir)
        .env_remove("NML_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap();
    reader
        .records()
        .map(|r| r.unwrap()[idx].parse().ok())
        .collect()
}

#[test]
fn solve_writes_the_shared_schema() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &["solve", "--t-max", "10", "--dt", "0.01", "--out", "run.csv"],
    ));
    assert_eq!(s["method"], "exact");
    assert_eq!(s["points"], 1001);
    let text = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re_c,im_c,population,gamma_t,s_t"));
    assert_eq!(lines.next(), Some("0.0,1.0,0.0,1.0,0.0,0.0"));
    assert_eq!(text.lines().count(), 1002);
}

#[test]
fn identical_specs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        summary(&nml(
            dir.path(),
            &[
                "perturb",
                "--method",
                "ms1",
                "--kernel",
                "gaussian-error",
                "--t-max",
                "5",
                "--out",
                name,
            ],
        ));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn gme2_population_goes_negative() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &[
            "perturb", "--method", "gme2", "--gamma", "1", "--lambda", "0.1", "--t-max", "20",
        ],
    ));
    let pop = column(&dir.path().join("gme2.csv"), "population");
    let min = pop.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    assert!(min < 0.0, "{min}");
    assert!(column(&dir.path().join("gme2.csv"), "re_c")
        .iter()
        .all(Option::is_none));
    assert!(s["t_hat"].as_f64().is_some());
}

#[test]
fn comparing_a_file_with_itself_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    summary(&nml(
        dir.path(),
        &["solve", "--t-max", "12", "--dt", "0.01"],
    ));
    let s = summary(&nml(dir.path(), &["compare", "exact.csv", "exact.csv"]));
    assert_eq!(s["linf_population"], 0.0);
    assert_eq!(s["l2_population"], 0.0);
    assert_eq!(s["t_hat_rel_error"], 0.0);
    assert!(dir.path().join("comparison.json").exists());
}

#[test]
fn compare_handles_mismatched_grids_and_population_only_curves() {
    let dir = tempfile::tempdir().unwrap();
    summary(&nml(
        dir.path(),
        &["solve", "--t-max", "20", "--dt", "0.005"],
    ));
    summary(&nml(
        dir.path(),
        &["perturb", "--method", "tcl2", "--dt", "0.01"],
    ));
    let s = summary(&nml(dir.path(), &["compare", "tcl2.csv", "exact.csv"]));
    assert_eq!(s["points"], 2001);
    assert!(s["linf_population"].as_f64().unwrap() > 0.1);
    assert_eq!(s["t_hat_a"], Value::Null);
    assert_eq!(s["t_hat_rel_error"], Value::Null);
}

#[test]
fn diagnose_round_trips_a_solve() {
    let dir = tempfile::tempdir().unwrap();
    summary(&nml(
        dir.path(),
        &["solve", "--dt", "0.005", "--out", "exact.csv"],
    ));
    let from_file = summary(&nml(
        dir.path(),
        &["diagnose", "exact.csv", "--out", "file"],
    ));
    let in_memory = summary(&nml(
        dir.path(),
        &["diagnose", "--dt", "0.005", "--out", "memory"],
    ));
    assert_eq!(from_file["markovian"], false);
    assert_eq!(from_file["markovian"], in_memory["markovian"]);
    assert_eq!(
        from_file["negative_intervals"],
        in_memory["negative_intervals"]
    );
    let f = from_file["singularities"].as_array().unwrap();
    let m = in_memory["singularities"].as_array().unwrap();
    assert_eq!(f.len(), m.len());
    for (a, b) in f.iter().zip(m) {
        assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-9);
    }
    assert!((from_file["t_hat"].as_f64().unwrap() - 8.2420).abs() < 1e-3);
    // the augmented CSV keeps the dissipator columns of the original
    let g_in = column(&dir.path().join("exact.csv"), "gamma_t");
    let g_out = column(&dir.path().join("file/exact_diagnosed.csv"), "gamma_t");
    assert_eq!(g_in.len(), g_out.len());
    for (a, b) in g_in.iter().zip(&g_out) {
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0)),
            (None, None) => {}
            other => panic!("column mismatch {other:?}"),
        }
    }
    assert!(dir.path().join("file/exact_diagnostics.json").exists());
}

#[test]
fn weak_coupling_diagnoses_as_markovian() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &["diagnose", "--gamma", "0.04", "--dt", "0.1"],
    ));
    assert_eq!(s["markovian"], true);
    assert_eq!(s["t_hat"], Value::Null);
}

#[test]
fn sweep_writes_one_csv_per_value_and_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &[
            "sweep",
            "--sweep",
            "lambda:0.05:0.2:4",
            "--method",
            "ms0",
            "--dt",
            "0.01",
            "--out",
            "sw",
        ],
    ));
    let runs = s["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for (i, run) in runs.iter().enumerate() {
        assert_eq!(run["index"], i);
        assert!(dir
            .path()
            .join("sw")
            .join(run["csv"].as_str().unwrap())
            .exists());
    }
    assert_eq!(runs[3]["lambda"], 0.2);
    let index: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sw/index.json")).unwrap())
            .unwrap();
    assert_eq!(index["parameter"], "lambda");
}

#[test]
fn figure_two_manifest_lists_three_curves_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &["figure", "2", "--dt", "0.01", "--out", "one"],
    ));
    summary(&nml(
        dir.path(),
        &["figure", "2", "--dt", "0.01", "--out", "two"],
    ));
    let files: Vec<&str> = s["curves"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["csv"].as_str().unwrap())
        .collect();
    assert_eq!(files, ["exact.csv", "ms0.csv", "ms1.csv"]);
    assert_eq!(s["gamma"], 1.0);
    assert_eq!(s["lambda"], 0.1);
    for name in ["manifest.json", "exact.csv", "ms0.csv", "ms1.csv"] {
        let a = std::fs::read(dir.path().join("one").join(name)).unwrap();
        assert_eq!(
            a,
            std::fs::read(dir.path().join("two").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn figure_three_has_six_panels() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(dir.path(), &["figure", "3", "--dt", "0.01"]));
    let curves = s["curves"].as_array().unwrap();
    let mut panels: Vec<&str> = curves
        .iter()
        .map(|c| c["panel"].as_str().unwrap())
        .collect();
    panels.dedup();
    assert_eq!(panels, ["a", "b", "c", "d", "e", "f"]);
    let labels = |panel: &str| -> Vec<&str> {
        curves
            .iter()
            .filter(|c| c["panel"] == panel)
            .map(|c| c["label"].as_str().unwrap())
            .collect()
    };
    assert_eq!(labels("d"), ["exact", "ms0", "ms1"]);
    assert_eq!(labels("f"), ["exact", "ms0"]);
    assert_eq!(s["notes"].as_array().unwrap().len(), 2);
    let kernel_csv =
        std::fs::read_to_string(dir.path().join("figure3/gaussian_kernel.csv")).unwrap();
    assert!(kernel_csv.starts_with("t,correlation\n0.0,0.05\n"));
}

#[test]
fn config_file_supplies_the_command_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "perturb", "method": "odp6", "t-max": 20, "gamma": 5, "out": "cfg.csv"}"#,
    )
    .unwrap();
    let s = summary(&nml(dir.path(), &["--config", "run.json", "--gamma", "1"]));
    assert_eq!(s["method"], "odp6");
    assert_eq!(s["gamma"], 1.0);
    let pop = column(&dir.path().join("cfg.csv"), "population");
    assert!(pop.last().unwrap().unwrap() > 10.0);
}

#[test]
fn out_dir_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nml"))
        .args(["perturb", "--method", "closed-form", "--t-max", "2"])
        .current_dir(dir.path())
        .env("NML_OUT_DIR", dir.path().join("env"))
        .output()
        .unwrap();
    summary(&out);
    assert!(dir.path().join("env/closed-form.csv").exists());
}

#[test]
fn ms1_falls_back_with_a_warning_when_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let out = nml(
        dir.path(),
        &[
            "perturb", "--method", "ms1", "--kernel", "gaussian", "--dt", "0.01",
        ],
    );
    let s = summary(&out);
    assert_eq!(s["method"], "ms0");
    assert_eq!(s["requested_method"], "ms1");
    assert!(s["warning"].as_str().unwrap().contains("collapses"));
    assert_eq!(s["coefficients"]["collapsed_tau"], true);
    assert_eq!(s["coefficients"]["b1_over_b0"], Value::Null);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let inverse = summary(&nml(
        dir.path(),
        &[
            "perturb",
            "--method",
            "ms1",
            "--kernel",
            "inverse-law",
            "--dt",
            "0.01",
        ],
    ));
    assert_eq!(inverse["method"], "ms0");
}

#[test]
fn ms_coefficients_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&nml(
        dir.path(),
        &["perturb", "--method", "ms1", "--dt", "0.01"],
    ));
    let c = &s["coefficients"];
    assert_eq!(c["a1_over_a0"], -0.25);
    assert_eq!(c["b1_over_b0"], 0.0);
    assert_eq!(c["decay"], -0.05);
    assert!((c["c1"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-11);
    assert!((c["singularities_ms0"][0].as_f64().unwrap() - 7.02481).abs() < 1e-5);
    assert!(dir.path().join("ms1_coefficients.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| nml(dir.path(), args).status.code();
    assert_eq!(code(&["solve", "--kernel", "cauchy"]), Some(2));
    assert_eq!(code(&["perturb", "--method", "ms9"]), Some(2));
    assert_eq!(code(&["perturb"]), Some(2));
    assert_eq!(
        code(&["perturb", "--method", "tcl6", "--kernel", "gaussian"]),
        Some(2)
    );
    assert_eq!(code(&["figure", "4"]), Some(2));
    assert_eq!(code(&[]), Some(2));
    assert_eq!(
        code(&["solve", "--gamma", "1000", "--lambda", "100", "--dt", "0.5", "--t-max", "50"]),
        Some(3)
    );
    assert_eq!(code(&["compare", "missing.csv", "missing.csv"]), Some(4));
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    assert_eq!(
        code(&["solve", "--dt", "0.1", "--out", "blocker/x.csv"]),
        Some(4)
    );
    assert_eq!(code(&["solve", "--dt", "0.1", "--t-max", "1"]), Some(0));
}
