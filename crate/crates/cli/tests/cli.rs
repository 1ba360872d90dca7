//! End-to-end tests of the `qtomo` binary: exit codes, file formats, and
//! byte-for-byte report reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qtomo_core::fourqubit;
use qtomo_core::observables::{build_observable_set, isotropic_targets};
use qtomo_core::operators::{expectation, normalized_exp, total_j_squared};

fn qtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtomo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

// ---------------------------------------------------------------------------
// fourqubit

#[test]
fn fourqubit_defaults_match_and_exit_zero() {
    let output = qtomo(&["fourqubit"]);
    let text = stdout(&output);
    assert_eq!(exit_code(&output), 0, "stdout: {text}");
    assert!(text.contains("lambda_e"));
    assert!(text.contains("weak-criterion"));
    // the printed chain values at display precision
    assert!(
        text.contains("0.179951507247"),
        "lambda_prior missing: {text}"
    );
    assert!(
        text.contains("0.234937765769"),
        "lambda_data missing: {text}"
    );
    assert!(text.contains("0.207795321763"), "lambda_e missing: {text}");
    assert!(text.contains("-0.022597617026"), "c_e missing: {text}");
}

#[test]
fn fourqubit_equal_strengths_confirm_the_prior() {
    let output = qtomo(&["fourqubit", "--c-data", "-0.02"]);
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("prior-confirmed"));
}

#[test]
fn fourqubit_small_sample_exits_two() {
    let output = qtomo(&["fourqubit", "-N", "3000"]);
    assert_eq!(exit_code(&output), 2);
    assert!(stdout(&output).contains("insufficient-data"));
}

#[test]
fn fourqubit_out_of_bounds_strength_exits_one() {
    let output = qtomo(&["fourqubit", "--c-prior", "0.2"]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("open interval"));
}

// ---------------------------------------------------------------------------
// check

#[test]
fn check_passes_by_default() {
    let output = qtomo(&["check"]);
    let text = stdout(&output);
    assert_eq!(exit_code(&output), 0, "stdout: {text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(!text.contains("FAIL"));
}

#[test]
fn check_beta_perturbation_is_a_negative_control() {
    let output = qtomo(&["check", "--inject-beta-perturbation", "1e-3"]);
    assert_eq!(exit_code(&output), 4);
    let text = stdout(&output);
    assert!(text.contains("FAIL"));
}

#[test]
fn check_dim_sweep_runs_every_size() {
    let output = qtomo(&["check", "--dim-sweep", "2..16"]);
    assert_eq!(exit_code(&output), 0, "stdout: {}", stdout(&output));
}

#[test]
fn check_rejects_malformed_sweep() {
    let output = qtomo(&["check", "--dim-sweep", "abc"]);
    assert_eq!(exit_code(&output), 1);
}

// ---------------------------------------------------------------------------
// estimate on the shipped fixtures

fn tmp_out(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qtomo-cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn estimate_prior_confirmed_fixture() {
    let out = tmp_out("report_confirmed.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        &fixture("data_prior_confirmed.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("prior-confirmed"));
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.contains("\"status\": \"prior-confirmed\""));
    assert!(report.contains("\"alpha0\": \"infinity\""));
}

#[test]
fn estimate_insufficient_fixture_exits_two() {
    let out = tmp_out("report_insufficient.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        &fixture("data_insufficient.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2, "stderr: {}", stderr(&output));
    let report = fs::read_to_string(&out).unwrap();
    assert!(report.contains("\"status\": \"insufficient-data\""));
    assert!(report.contains("\"alpha0\": null"));
}

#[test]
fn estimate_infeasible_fixture_exits_three() {
    let out = tmp_out("report_infeasible.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        &fixture("data_infeasible.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3);
    assert!(stderr(&output).contains("infeasible"));
}

#[test]
fn estimate_rank_deficient_prior_exits_one() {
    let out = tmp_out("report_rank.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_rank_deficient_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        &fixture("data_correlated.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("rank-deficient"));
}

#[test]
fn estimate_criterion_threshold_flag_controls_the_flag_status() {
    let strict = tmp_out("report_strict.json");
    let lax = tmp_out("report_lax.json");
    for (out, threshold) in [(&strict, "1e6"), (&lax, "0.0")] {
        let output = qtomo(&[
            "estimate",
            "--prior",
            &fixture("prior_mixed_m2.json"),
            "--observables",
            &fixture("observables_m2.json"),
            "--data",
            &fixture("data_correlated.json"),
            "--criterion-threshold",
            threshold,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    }
    let strict_report = fs::read_to_string(&strict).unwrap();
    let lax_report = fs::read_to_string(&lax).unwrap();
    assert!(strict_report.contains("\"status\": \"weak-criterion\""));
    assert!(lax_report.contains("\"status\": \"applicable\""));
}

#[test]
fn estimate_rejects_mismatched_dataset_labels() {
    let broken = tmp_out("mismatched_labels.json");
    fs::write(
        &broken,
        "{\"N\": 1000, \"means\": [{\"label\": \"nope\", \"value\": 0.1}]}",
    )
    .unwrap();
    let out = tmp_out("report_mismatch.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        broken.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("no mean for observable"));
}

#[test]
fn estimate_malformed_json_reports_line_and_column() {
    let broken = tmp_out("broken.json");
    fs::write(&broken, "{\"dim\": 4,\n \"re\": [[oops]]}").unwrap();
    let out = tmp_out("report_broken.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        broken.to_str().unwrap(),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        &fixture("data_correlated.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    let err = stderr(&output);
    assert!(err.contains("line 2"), "diagnostic: {err}");
}

#[test]
fn estimate_applicable_run_is_byte_reproducible() {
    let out_a = tmp_out("report_a.json");
    let out_b = tmp_out("report_b.json");
    for out in [&out_a, &out_b] {
        let output = qtomo(&[
            "estimate",
            "--prior",
            &fixture("prior_mixed_m2.json"),
            "--observables",
            &fixture("observables_m2.json"),
            "--data",
            &fixture("data_correlated.json"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");
}

// ---------------------------------------------------------------------------
// the worked example through input files

/// Writes the M = 4 problem as input files: dense prior, 48 Pauli-term
/// observables, and the isotropic dataset.
fn write_worked_example_files(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let j2 = total_j_squared(4).unwrap();
    let lambda_prior = fourqubit::lambda_of_c(-0.02).unwrap();
    let (sigma, _) = normalized_exp(&j2.scaled(-lambda_prior)).unwrap();

    let mut prior = String::from("{\n  \"dim\": 16,\n");
    for (name, pick) in [("re", true), ("im", false)] {
        prior.push_str(&format!("  \"{name}\": [\n"));
        for i in 0..16 {
            let row: Vec<String> = (0..16)
                .map(|j| {
                    let z = sigma.entries()[(i, j)];
                    format!("{:.17e}", if pick { z.re } else { z.im })
                })
                .collect();
            prior.push_str(&format!(
                "    [{}]{}\n",
                row.join(", "),
                if i == 15 { "" } else { "," }
            ));
        }
        prior.push_str(if pick { "  ],\n" } else { "  ]\n" });
    }
    prior.push_str("}\n");
    let prior_path = dir.join("prior_m4.json");
    fs::write(&prior_path, prior).unwrap();

    // observables: spins then symmetrized pairs, matching builder labels
    let axes = ['x', 'y', 'z'];
    let pauli = |i: usize, a: char| -> String {
        let mut s = vec!['I'; 4];
        s[i] = a.to_ascii_uppercase();
        s.into_iter().collect()
    };
    let mut entries = Vec::new();
    for i in 0..4 {
        for a in axes {
            entries.push(format!(
                "{{\"label\": \"S{i}{a}\", \"pauli_terms\": [{{\"string\": \"{}\", \"coeff\": 0.5}}]}}",
                pauli(i, a)
            ));
        }
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            for (ai, a) in axes.iter().enumerate() {
                for b in axes.iter().skip(ai) {
                    let mut first: Vec<char> = vec!['I'; 4];
                    first[i] = a.to_ascii_uppercase();
                    first[j] = b.to_ascii_uppercase();
                    let first: String = first.into_iter().collect();
                    let terms = if a == b {
                        format!("[{{\"string\": \"{first}\", \"coeff\": 0.25}}]")
                    } else {
                        let mut second: Vec<char> = vec!['I'; 4];
                        second[i] = b.to_ascii_uppercase();
                        second[j] = a.to_ascii_uppercase();
                        let second: String = second.into_iter().collect();
                        format!(
                            "[{{\"string\": \"{first}\", \"coeff\": 0.125}}, \
                             {{\"string\": \"{second}\", \"coeff\": 0.125}}]"
                        )
                    };
                    entries.push(format!(
                        "{{\"label\": \"C{i}{j}{a}{b}\", \"pauli_terms\": {terms}}}"
                    ));
                }
            }
        }
    }
    let observables_path = dir.join("observables_m4.json");
    fs::write(
        &observables_path,
        format!("[\n{}\n]\n", entries.join(",\n")),
    )
    .unwrap();

    let set = build_observable_set(4).unwrap();
    let targets = isotropic_targets(4, -0.025).unwrap();
    let means: Vec<String> = set
        .labels()
        .zip(&targets)
        .map(|(label, value)| format!("{{\"label\": \"{label}\", \"value\": {value}}}"))
        .collect();
    let data_path = dir.join("data_m4.json");
    fs::write(
        &data_path,
        format!("{{\"N\": 10000, \"means\": [\n{}\n]}}\n", means.join(",\n")),
    )
    .unwrap();

    (prior_path, observables_path, data_path)
}

#[test]
fn estimate_reproduces_the_worked_example_through_files() {
    let dir = std::env::temp_dir().join("qtomo-worked-example");
    fs::create_dir_all(&dir).unwrap();
    let (prior, observables, data) = write_worked_example_files(&dir);
    let out = dir.join("report_m4.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        prior.to_str().unwrap(),
        "--observables",
        observables.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    // pull rho_e out of the report and reduce it to c_e
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], "weak-criterion");
    let dim = report["rho_e"]["dim"].as_u64().unwrap() as usize;
    assert_eq!(dim, 16);
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re = report["rho_e"]["re"][i][j].as_f64().unwrap();
            let im = report["rho_e"]["im"][i][j].as_f64().unwrap();
            m[(i, j)] = num_complex::Complex64::new(re, im);
        }
    }
    let rho_e =
        qtomo_core::DensityMatrix::new(qtomo_core::HermitianOperator::new(m).unwrap()).unwrap();
    let j2 = total_j_squared(4).unwrap();
    let c_e = (expectation(&rho_e, &j2).unwrap() - 3.0) / 36.0;
    assert!((c_e - (-0.02265)).abs() < 3e-4, "c_e = {c_e}");
    assert!((c_e - (-0.022_597_617_026)).abs() < 1e-5, "c_e = {c_e}");

    let alpha0 = report["alpha0"].as_f64().unwrap();
    assert!((alpha0 - 9_748.105_450_664).abs() < 1e-2);
}

// ---------------------------------------------------------------------------
// simulate

#[test]
fn simulate_writes_deterministic_datasets_that_estimate_accepts() {
    let dir = std::env::temp_dir().join("qtomo-simulate");
    fs::create_dir_all(&dir).unwrap();
    let out_a = dir.join("sim_a.json");
    let out_b = dir.join("sim_b.json");
    for out in [&out_a, &out_b] {
        let output = qtomo(&[
            "simulate",
            "--truth",
            &fixture("prior_mixed_m2.json"),
            "--observables",
            &fixture("observables_m2.json"),
            "-N",
            "400",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());

    let different = dir.join("sim_c.json");
    let output = qtomo(&[
        "simulate",
        "--truth",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "-N",
        "400",
        "--seed",
        "12",
        "--out",
        different.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    assert_ne!(fs::read(&out_a).unwrap(), fs::read(&different).unwrap());

    // the simulated dataset feeds straight back into estimate
    let report = dir.join("sim_report.json");
    let output = qtomo(&[
        "estimate",
        "--prior",
        &fixture("prior_mixed_m2.json"),
        "--observables",
        &fixture("observables_m2.json"),
        "--data",
        out_a.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let code = exit_code(&output);
    assert!(
        code == 0 || code == 2,
        "unexpected exit {code}: {}",
        stderr(&output)
    );
    assert!(stdout(&output).contains("seed 11"));
}
