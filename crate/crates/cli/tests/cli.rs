//! End-to-end tests of the `inconc` binary: output schemas, numerical
//! values against library closed forms, exit codes, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use inconc::concentration::{noneq_measure, qutrit_delta_p};
use inconc::correlations::{qutrit_grid, qutrit_optimal_marginals};
use inconc::states::DensityMatrix;

const GOLDEN_P: f64 = 0.618_033_988_749_894_9;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_inconc"));
    cmd.env_remove("INCONC_TOLERANCE");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary launches")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn parse_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        stderr_str(out)
    );
    serde_json::from_str(&stdout_str(out)).expect("stdout is one JSON document")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr_str(out));
}

fn num(value: &Value, field: &str) -> f64 {
    value[field]
        .as_f64()
        .unwrap_or_else(|| panic!("missing number {field}"))
}

fn write_state(dir: &Path, name: &str, eigenvalues: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let doc = serde_json::json!({ "eigenvalues": eigenvalues });
    std::fs::write(&path, doc.to_string()).expect("state file writes");
    path
}

#[test]
fn measure_reports_the_flat_qutrit() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "flat3.json", &[0.5, 0.5, 0.0]);
    let out = run(&["measure", state.to_str().unwrap()]);
    let doc = parse_json(&out);
    assert!((num(&doc, "P") - 1.5f64.log2()).abs() < 1e-9);
    assert!((num(&doc, "S") - 1.0).abs() < 1e-9);
    assert!((num(&doc, "p_guess") - 2.0 / 3.0).abs() < 1e-9);
    assert_eq!(doc["bound"], Value::Bool(false));
    let spectrum: Vec<f64> = doc["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(spectrum, vec![0.5, 0.5, 0.0]);
}

#[test]
fn measure_flags_states_with_no_gain_as_bound() {
    let dir = tempfile::tempdir().unwrap();
    let third = 1.0 / 3.0;
    let mixed = write_state(dir.path(), "mm3.json", &[third, third, third]);
    let out = run(&["measure", mixed.to_str().unwrap()]);
    let doc = parse_json(&out);
    assert!(num(&doc, "P").abs() < 1e-9);
    assert!((num(&doc, "p_guess") - 1.0).abs() < 1e-9);
    // Equilibrium itself carries no resource, so it is not "bound".
    assert_eq!(doc["bound"], Value::Bool(false));

    let qubit = write_state(dir.path(), "q73.json", &[0.7, 0.3]);
    let out = run(&["measure", qubit.to_str().unwrap()]);
    let doc = parse_json(&out);
    assert_eq!(doc["bound"], Value::Bool(true));
    assert!((num(&doc, "p_guess") - 0.958_257_569_496).abs() < 1e-9);
}

#[test]
fn measure_accepts_dense_matrix_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plus.json");
    let doc = serde_json::json!({
        "dim": 2,
        "matrix": [
            [{"re": 0.5, "im": 0.0}, {"re": 0.5, "im": 0.0}],
            [{"re": 0.5, "im": 0.0}, {"re": 0.5, "im": 0.0}]
        ]
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = run(&["measure", path.to_str().unwrap()]);
    let doc = parse_json(&out);
    assert!((num(&doc, "P") - 1.0).abs() < 1e-9);
    assert!(num(&doc, "S").abs() < 1e-9);
    assert!((num(&doc, "p_guess") - 0.5).abs() < 1e-9);
}

#[test]
fn parse_failures_exit_2_and_validation_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_exit(&run(&["measure", missing.to_str().unwrap()]), 2);

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "not json at all").unwrap();
    let out = run(&["measure", garbage.to_str().unwrap()]);
    assert_exit(&out, 2);
    assert!(stderr_str(&out).starts_with("error:"));

    let unnormalized = write_state(dir.path(), "bad.json", &[0.6, 0.5]);
    assert_exit(&run(&["measure", unnormalized.to_str().unwrap()]), 3);
}

#[test]
fn tolerance_flag_wins_over_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "bad.json", &[0.6, 0.5]);
    let path = state.to_str().unwrap();

    // Loosened via the environment, the 10% trace defect is accepted.
    let out = bin()
        .args(["measure", path])
        .env("INCONC_TOLERANCE", "0.2")
        .output()
        .unwrap();
    assert_exit(&out, 0);

    // An explicit strict flag overrides the loose environment.
    let out = bin()
        .args(["--tolerance", "1e-9", "measure", path])
        .env("INCONC_TOLERANCE", "0.2")
        .output()
        .unwrap();
    assert_exit(&out, 3);

    let out = bin()
        .args(["measure", path])
        .env("INCONC_TOLERANCE", "bogus")
        .output()
        .unwrap();
    assert_exit(&out, 2);

    assert_exit(&run(&["--tolerance=-1", "measure", path]), 4);
}

#[test]
fn concentrate_matches_the_qutrit_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "q532.json", &[0.5, 0.3, 0.2]);
    let report_path = dir.path().join("full.json");
    let out = run(&[
        "concentrate",
        state.to_str().unwrap(),
        "--json",
        report_path.to_str().unwrap(),
    ]);
    let doc = parse_json(&out);
    assert!((num(&doc, "delta_p") - 1.1f64.log2()).abs() < 1e-9);
    assert!((num(&doc, "p_after") - num(&doc, "p_before") - num(&doc, "delta_p")).abs() < 1e-9);
    let sigma_a: Vec<f64> = doc["sigma_a_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let sigma_b: Vec<f64> = doc["sigma_b_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in sigma_a.iter().zip([0.55, 0.25, 0.2]) {
        assert!((got - want).abs() < 1e-9);
    }
    for (got, want) in sigma_b.iter().zip([0.45, 0.3, 0.25]) {
        assert!((got - want).abs() < 1e-9);
    }
    assert!((num(&doc, "mutual_information") - 0.007_299_156_760_47).abs() < 1e-9);

    // The full report on disk round-trips through the state parser.
    let full: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(full["unitary"].as_array().unwrap().len(), 9);
    assert_eq!(full["sigma_ab"]["dim_a"], 3);
    let sigma_a_state =
        DensityMatrix::from_json(&full["sigma_a"].to_string()).expect("valid state");
    for (got, want) in sigma_a_state.eigenvalues().iter().zip(sigma_a.iter()) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn the_fixed_swap_matches_the_optimal_unitary_on_qutrits() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "q532.json", &[0.5, 0.3, 0.2]);
    let path = state.to_str().unwrap();
    let optimal = parse_json(&run(&["concentrate", path]));
    let simple = parse_json(&run(&["concentrate", path, "--unitary", "simple"]));
    assert!((num(&optimal, "delta_p") - num(&simple, "delta_p")).abs() < 1e-12);

    // The fixed swap needs a third level.
    let qubit = write_state(dir.path(), "q73.json", &[0.7, 0.3]);
    assert_exit(
        &run(&[
            "concentrate",
            qubit.to_str().unwrap(),
            "--unitary",
            "simple",
        ]),
        4,
    );
}

#[test]
fn sweep_is_deterministic_and_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a1.csv");
    let second = dir.path().join("a2.csv");
    for path in [&first, &second] {
        assert_exit(
            &run(&[
                "sweep-qutrit",
                "--step",
                "0.05",
                "--panel",
                "a",
                "--out",
                path.to_str().unwrap(),
            ]),
            0,
        );
    }
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(
        bytes,
        std::fs::read(&second).unwrap(),
        "sweep output drifted"
    );

    // Writing to stdout produces the same bytes as writing to a file.
    let streamed = run(&["sweep-qutrit", "--step", "0.05", "--panel", "a"]);
    assert_eq!(bytes, streamed.stdout);

    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a0,a1,a2,value"));
    assert_eq!(lines.next(), Some("1,0,0,0"));

    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), qutrit_grid(20, false).unwrap().len());
    for row in &rows {
        let expected = qutrit_delta_p(
            DensityMatrix::from_eigenvalues(&row[..3])
                .unwrap()
                .spectrum(),
        )
        .unwrap();
        assert!((row[3] - expected).abs() < 1e-9, "row {row:?}");
    }
}

#[test]
fn sweep_panels_are_mutually_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let path_b = dir.path().join("b.csv");
    let path_c = dir.path().join("c.csv");
    for (panel, path) in [("b", &path_b), ("c", &path_c)] {
        assert_exit(
            &run(&[
                "sweep-qutrit",
                "--step",
                "0.05",
                "--panel",
                panel,
                "--out",
                path.to_str().unwrap(),
            ]),
            0,
        );
    }
    let parse = |path: &Path| -> Vec<Vec<f64>> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|line| line.split(',').map(|f| f.parse().unwrap()).collect())
            .collect()
    };
    let b_rows = parse(&path_b);
    let c_rows = parse(&path_c);
    assert_eq!(b_rows.len(), c_rows.len());
    for (b, c) in b_rows.iter().zip(c_rows.iter()) {
        assert_eq!(b[..3], c[..3], "panel grids diverged");
        let rho = DensityMatrix::from_eigenvalues(&b[..3]).unwrap();
        let (_, sigma_b) = qutrit_optimal_marginals(rho.spectrum()).unwrap();
        let expected_b = noneq_measure(&sigma_b) - noneq_measure(&rho);
        assert!((b[3] - expected_b).abs() < 1e-9);
        // Correlations appear exactly where concentration does.
        let gain = qutrit_delta_p(rho.spectrum()).unwrap();
        if gain > 1e-9 {
            assert!(c[3] > 1e-12, "gain without mutual information at {b:?}");
        } else {
            assert!(c[3] < 1e-9, "mutual information without gain at {b:?}");
        }
    }
    // The a1 == a2 ridge creates no correlations; (1/2, 1/4, 1/4) sits
    // on this grid and must report zero mutual information.
    let ridge = c_rows
        .iter()
        .find(|row| row[0] == 0.5 && row[1] == 0.25)
        .expect("balanced point on the grid");
    assert!(ridge[3].abs() < 1e-9);
}

#[test]
fn sweep_full_triangle_covers_the_whole_simplex() {
    let out = run(&[
        "sweep-qutrit",
        "--step",
        "0.1",
        "--panel",
        "a",
        "--full-triangle",
    ]);
    assert_exit(&out, 0);
    let text = stdout_str(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 66);
    let unsorted = rows.iter().any(|line| {
        let f: Vec<f64> = line
            .split(',')
            .take(3)
            .map(|x| x.parse().unwrap())
            .collect();
        f[0] < f[1] || f[1] < f[2]
    });
    assert!(unsorted, "full triangle should leave the sorted sector");

    assert_exit(&run(&["sweep-qutrit", "--step", "0.7", "--panel", "a"]), 4);
    assert_exit(&run(&["sweep-qutrit", "--step", "0", "--panel", "a"]), 4);
}

#[test]
fn mpemba_comparison_detects_the_inversion() {
    let golden = format!("{GOLDEN_P}");
    let out = run(&["mpemba", "--p1", &golden, "--p2", "0.5"]);
    let doc = parse_json(&out);
    assert_eq!(doc["inversion"], Value::Bool(true));
    assert!(num(&doc, "measure_in_1") > num(&doc, "measure_in_2"));
    assert!(num(&doc, "measure_out_1") < num(&doc, "measure_out_2"));
    let expected_out = (3.0 * (1.0 - GOLDEN_P)).log2();
    assert!((num(&doc, "measure_out_1") - expected_out).abs() < 1e-9);

    let far = parse_json(&run(&["mpemba", "--p1", "0.8", "--p2", "0.5"]));
    assert_eq!(far["inversion"], Value::Bool(false));
}

#[test]
fn mpemba_scan_brackets_the_inversion_window() {
    let out = run(&["mpemba", "--scan", "0.005"]);
    let doc = parse_json(&out);
    let window = doc["inversion_window"].as_array().expect("window found");
    let lo = window[0].as_f64().unwrap();
    let hi = window[1].as_f64().unwrap();
    assert!(lo > 0.5 && lo < 0.52, "window start {lo}");
    assert!((hi - 0.5f64.sqrt()).abs() < 5e-3, "window end {hi}");
    assert!(lo < GOLDEN_P && GOLDEN_P < hi);
    let rows = doc["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!((num(&rows[0], "p1") - 0.5).abs() < 1e-12);
}

#[test]
fn mpemba_argument_errors_are_usage_or_domain_errors() {
    assert_exit(&run(&["mpemba"]), 2);
    assert_exit(&run(&["mpemba", "--p1", "0.6"]), 2);
    assert_exit(
        &run(&["mpemba", "--p1", "0.6", "--p2", "0.5", "--scan", "0.01"]),
        2,
    );
    assert_exit(&run(&["mpemba", "--p1", "1.2", "--p2", "0.5"]), 4);
}

#[test]
fn activation_unlocks_the_full_budget_of_a_bound_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "q73.json", &[0.7, 0.3]);
    let path = state.to_str().unwrap();
    let doc = parse_json(&run(&["activate", path]));
    assert!(num(&doc, "delta_p").abs() < 1e-12);
    let budget = -0.7f64.log2();
    assert!((num(&doc, "activation_delta") - budget).abs() < 1e-9);
    assert!((num(&doc, "entanglement_advantage") - budget).abs() < 1e-9);
    assert!((num(&doc, "activated_gain") - budget).abs() < 1e-9);

    // Without any purification weight the copies stay uncorrelated and
    // the no-go for qubits holds.
    let doc = parse_json(&run(&["activate", path, "--p", "0"]));
    assert!(num(&doc, "activated_gain").abs() < 1e-12);

    assert_exit(&run(&["activate", path, "--p", "1.5"]), 4);
}

#[test]
fn randomness_reports_the_frozen_flat_qutrit_construction() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "flat3.json", &[0.5, 0.5, 0.0]);
    let doc = parse_json(&run(&["randomness", state.to_str().unwrap()]));
    assert_eq!(doc["constructed"], Value::Bool(true));
    assert_eq!(doc["source_pair"], serde_json::json!([1, 0]));
    assert_eq!(doc["target_level"], 2);
    assert!((num(&doc, "delta_star") - 0.25).abs() < 1e-12);
    assert!((num(&doc, "p_guess_before") - 2.0 / 3.0).abs() < 1e-9);
    assert!((num(&doc, "p_guess_after") - (2.0 + 3.0f64.sqrt()) / 6.0).abs() < 1e-9);
    let expected_gain = 2.0f64.sqrt() - 0.75f64.sqrt() - 0.5;
    assert!((num(&doc, "gain") - expected_gain).abs() < 1e-9);
    let spectrum: Vec<f64> = doc["output_eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in spectrum.iter().zip([0.75, 0.25, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn randomness_reports_when_no_construction_exists() {
    let dir = tempfile::tempdir().unwrap();
    let qubit = write_state(dir.path(), "q73.json", &[0.7, 0.3]);
    let out = run(&["randomness", qubit.to_str().unwrap()]);
    let doc = parse_json(&out);
    assert_eq!(doc["constructed"], Value::Bool(false));
    assert!(num(&doc, "delta_p").abs() < 1e-12);
    assert!((num(&doc, "p_guess") - 0.958_257_569_496).abs() < 1e-9);
}

#[test]
fn verify_passes_clean_and_catches_an_injected_fault() {
    let out = run(&["verify", "--trials", "30", "--dims", "2,3", "--seed", "7"]);
    let doc = parse_json(&out);
    assert_eq!(doc["passed"], Value::Bool(true));
    let suites = doc["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    assert!(suites.iter().all(|s| s["passed"] == Value::Bool(true)));

    let out = bin()
        .args([
            "verify",
            "--trials",
            "30",
            "--dims",
            "2,3",
            "--inject-fault",
            "ky-fan",
        ])
        .output()
        .unwrap();
    assert_exit(&out, 1);
    let doc: Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["passed"], Value::Bool(false));
    let failed: Vec<&str> = doc["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == Value::Bool(false))
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["ky-fan-oracle"]);

    assert_exit(&run(&["verify", "--dims", "1"]), 4);
}

#[test]
fn pretty_output_is_tabular_not_json() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "flat3.json", &[0.5, 0.5, 0.0]);
    let out = run(&["--pretty", "measure", state.to_str().unwrap()]);
    assert_exit(&out, 0);
    let text = stdout_str(&out);
    assert!(text.starts_with("measure"));
    assert!(text.contains("p_guess"));
    assert!(!text.contains('{'));
}
