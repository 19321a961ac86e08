//! End-to-end tests of the `lgsim` binary: presets, scans, sampled runs,
//! file formats, and exit codes.

use lgsim_core::lgi::LgiSpec;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lgsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lgsim"))
}

fn run_ok(args: &[&str]) -> String {
    let out = lgsim().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "lgsim {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn run_err(args: &[&str]) -> Output {
    lgsim().args(args).output().expect("binary runs")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lgsim-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

fn header_and_rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} missing from {header:?}"))
}

#[test]
fn fig4_sweep_matches_golden_file() {
    let scenario = golden_dir().join("fig4_small.json");
    let got = run_ok(&["--scenario", scenario.to_str().unwrap()]);
    let want = std::fs::read_to_string(golden_dir().join("fig4_small.csv")).unwrap();
    assert_eq!(got, want, "fig4 sweep output drifted from the golden file");
}

#[test]
fn analytic_output_is_bit_identical_across_runs() {
    let a = run_ok(&["--preset", "fig4"]);
    let b = run_ok(&["--preset", "fig4"]);
    assert_eq!(a, b);
}

#[test]
fn fig4_violation_interval_appears_in_sweep() {
    let csv = run_ok(&["--preset", "fig4"]);
    let (header, rows) = header_and_rows(&csv);
    let theta_col = column(&header, "theta_deg");
    let violated_col = column(&header, "spec0_violated");
    let value_col = column(&header, "spec0_value");
    let lhs_col = column(&header, "eq2_lhs");
    let mut violated_thetas = Vec::new();
    for row in &rows {
        let theta: f64 = row[theta_col].parse().unwrap();
        let value: f64 = row[value_col].parse().unwrap();
        let lhs: f64 = row[lhs_col].parse().unwrap();
        if row[violated_col] == "1" {
            violated_thetas.push(theta as i32);
            assert!(value > 1.0);
        }
        // The inequality and its convex-sum form break together.
        assert_eq!(value > 1.0 + 1e-9, lhs > 1.0 + 1e-9, "theta {theta}");
    }
    assert_eq!(violated_thetas.first(), Some(&116));
    assert_eq!(violated_thetas.last(), Some(&154));
}

#[test]
fn fig3_sweep_has_flat_meter_average_and_ca_columns() {
    let csv = run_ok(&["--preset", "fig3"]);
    let (header, rows) = header_and_rows(&csv);
    for name in ["ca_p", "ca_m", "ca_pp", "ca_pm", "ca_mp", "ca_mm"] {
        column(&header, name);
    }
    // Empty spec list: correlations and averages only.
    assert!(!header.iter().any(|h| h.starts_with("spec")));
    let a1 = column(&header, "corr_A1");
    for row in &rows {
        let v: f64 = row[a1].parse().unwrap();
        assert!(v.abs() < 1e-10, "meter average should stay flat at zero");
    }
    // The double conditioned averages leave the eigenvalue range somewhere.
    let ca_pp = column(&header, "ca_pp");
    assert!(rows
        .iter()
        .any(|row| row[ca_pp].parse::<f64>().unwrap() < -1.0 - 1e-9));
}

#[test]
fn sampled_mode_is_deterministic_per_seed() {
    let args = [
        "--preset", "fig4", "--mode", "sampled", "--pairs", "20000", "--seed", "7",
    ];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a, b);
    let c = run_ok(&[
        "--preset", "fig4", "--mode", "sampled", "--pairs", "20000", "--seed", "8",
    ]);
    assert_ne!(a, c);
    // Sampled columns report errors and z-scores instead of flags.
    let (header, _) = header_and_rows(&a);
    column(&header, "se_A1");
    column(&header, "spec0_z_upper");
    assert!(!header.iter().any(|h| h == "spec0_violated"));
}

#[test]
fn sampled_counts_dump_carries_provenance() {
    let counts_path = temp_path("counts.csv");
    run_ok(&[
        "--preset",
        "fig4",
        "--mode",
        "sampled",
        "--pairs",
        "5000",
        "--seed",
        "3",
        "--counts-out",
        counts_path.to_str().unwrap(),
        "--out",
        temp_path("sweep.csv").to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&counts_path).unwrap();
    assert!(text.contains("# theta=0"));
    assert!(text.contains("# seed=3 pairs_expected=5000"));
    assert!(text.contains("outcome_tuple,count"));
    // 180 angles x (theta line + provenance + header + 8 bins).
    assert_eq!(text.lines().count(), 180 * 11);
}

#[test]
fn scan_m2_reports_violations_for_diagonal_product_state() {
    // Party 1 prepared along the diagonal axis, party 2 maximally mixed:
    // the single-party family picks up weak-measurement violations.
    let rho_path = temp_path("diag_state.json");
    std::fs::write(
        &rho_path,
        r#"[[[0.25,0],[0,0],[0.25,0],[0,0]],
           [[0,0],[0.25,0],[0,0],[0.25,0]],
           [[0.25,0],[0,0],[0.25,0],[0,0]],
           [[0,0],[0.25,0],[0,0],[0.25,0]]]"#,
    )
    .unwrap();
    let scenario_path = temp_path("diag_scan.json");
    std::fs::write(
        &scenario_path,
        format!(
            r#"{{ "state": {{"file": {rho_path:?}}},
                  "meter": {{"r_h": 0.0390, "r_v": 0.175}} }}"#
        ),
    )
    .unwrap();
    let csv = run_ok(&[
        "--scenario",
        scenario_path.to_str().unwrap(),
        "--scan-m",
        "2",
    ]);
    let mut total_rows = 0;
    let mut violations = 0u64;
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1] == "total" {
            total_rows += 1;
            violations += fields[2].parse::<u64>().unwrap();
        } else {
            // Flagged rows must carry the exact bounds of the family.
            assert_eq!(fields[5], "1");
        }
    }
    assert_eq!(total_rows, 180, "one tally per grid angle");
    assert!(violations > 0, "diagonal preparation should violate");
}

#[test]
fn scan_and_sweep_agree_on_flagged_values() {
    let csv_scan = run_ok(&["--preset", "fig4", "--scan-m", "3"]);
    let csv_sweep = run_ok(&["--preset", "fig4"]);

    // The fig4 inequality on the negated chain has this spec id.
    let spec = LgiSpec::from_canonical_coeffs(3, &[1, 0, 0, 0, 0, -1, 1]).unwrap();
    let id = spec.spec_id().to_string();

    let (header, rows) = header_and_rows(&csv_sweep);
    let theta_col = column(&header, "theta_deg");
    let value_col = column(&header, "spec0_value");
    let sweep_value = |theta: &str| -> f64 {
        rows.iter()
            .find(|r| r[theta_col] == theta)
            .unwrap_or_else(|| panic!("theta {theta} missing from sweep"))[value_col]
            .parse()
            .unwrap()
    };

    let mut matched = 0;
    for line in csv_scan.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1] != id {
            continue;
        }
        let scan_value: f64 = fields[2].parse().unwrap();
        assert_eq!(scan_value, sweep_value(fields[0]), "theta {}", fields[0]);
        matched += 1;
    }
    assert!(matched > 0, "fig4 spec never flagged by the scan");
}

#[test]
fn tomography_round_trip_through_the_binary() {
    use lgsim_core::qstate::{ideal_state, IdealState};
    use lgsim_core::tomography::setting_probabilities;

    // Counts from the ideal entangled state over the 16 analyzer pairings,
    // written in the CSV interface format.
    let truth = ideal_state(IdealState::Psi);
    let labels = ["H", "V", "D", "R"];
    let mut settings = Vec::new();
    let mut label_pairs = Vec::new();
    for a in labels {
        for b in labels {
            let pa = match a {
                "H" => lgsim_core::qstate::QubitOperator::projector_h(),
                "V" => lgsim_core::qstate::QubitOperator::projector_v(),
                "D" => lgsim_core::qstate::QubitOperator::projector_theta(45.0),
                _ => lgsim_core::qstate::PureState::qubit(
                    num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    num_complex::Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
                )
                .unwrap()
                .projector_qubit(),
            };
            let pb = match b {
                "H" => lgsim_core::qstate::QubitOperator::projector_h(),
                "V" => lgsim_core::qstate::QubitOperator::projector_v(),
                "D" => lgsim_core::qstate::QubitOperator::projector_theta(45.0),
                _ => lgsim_core::qstate::PureState::qubit(
                    num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    num_complex::Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
                )
                .unwrap()
                .projector_qubit(),
            };
            settings.push((pa, pb));
            label_pairs.push(format!("{a}{b}"));
        }
    }
    let flux = 1e5;
    let mut csv = String::from("setting_label,count\n");
    for (label, p) in label_pairs
        .iter()
        .zip(setting_probabilities(&settings, &truth))
    {
        csv.push_str(&format!("{label},{}\n", (flux * p).round()));
    }
    let counts_path = temp_path("tomo_counts.csv");
    std::fs::write(&counts_path, csv).unwrap();

    let out = run_ok(&[
        "--tomography",
        counts_path.to_str().unwrap(),
        "--pairs",
        "1e5",
    ]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let c = report["metrics"]["concurrence"].as_f64().unwrap();
    let p = report["metrics"]["purity"].as_f64().unwrap();
    assert!(c > 0.99, "concurrence {c}");
    assert!(p > 0.99, "purity {p}");
    // The reported matrix parses back through the state interface.
    let rho = report["rho"].to_string();
    let state_path = temp_path("tomo_rho.json");
    std::fs::write(&state_path, rho).unwrap();
    let scenario_path = temp_path("tomo_scenario.json");
    std::fs::write(
        &scenario_path,
        format!(
            r#"{{ "state": {{"file": {state_path:?}}},
                  "meter": {{"r_h": 0.0390, "r_v": 0.175}},
                  "theta_grid": {{"start": 0, "stop": 3, "step": 1}} }}"#
        ),
    )
    .unwrap();
    run_ok(&["--scenario", scenario_path.to_str().unwrap()]);
}

#[test]
fn calibration_uncertainties_are_reported_not_simulated() {
    let scenario_path = temp_path("unc_scenario.json");
    std::fs::write(
        &scenario_path,
        r#"{ "meter": {"r_h": 0.0390, "r_v": 0.175, "dr_h": 0.0007, "dr_v": 0.001},
             "theta_grid": {"start": 10, "stop": 12, "step": 1} }"#,
    )
    .unwrap();
    let with_unc = lgsim()
        .args(["--scenario", scenario_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(with_unc.status.success());
    let stderr = String::from_utf8_lossy(&with_unc.stderr);
    assert!(stderr.contains("cv_r = -13.1324 +- 0.1089"), "{stderr}");
    assert!(stderr.contains("cv_t = 1.5735 +- 0.0139"), "{stderr}");

    // The uncertainties must not perturb the computed columns.
    std::fs::write(
        &scenario_path,
        r#"{ "meter": {"r_h": 0.0390, "r_v": 0.175},
             "theta_grid": {"start": 10, "stop": 12, "step": 1} }"#,
    )
    .unwrap();
    let without = lgsim()
        .args(["--scenario", scenario_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(with_unc.stdout, without.stdout);
}

#[test]
fn spec_info_reports_bounds() {
    let out = run_ok(&["--preset", "fig4", "--spec-info"]);
    let specs: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(specs[0]["lower"], -3);
    assert_eq!(specs[0]["upper"], 1);
    assert_eq!(specs[0]["coeffs"]["A1"], 1);
}

#[test]
fn config_errors_exit_with_code_2() {
    for args in [
        vec!["--preset", "fig9"],
        vec!["--scenario", "/nonexistent/path.json"],
        vec!["--preset", "fig4", "--mode", "sampled"], // missing --pairs
        vec!["--preset", "fig4", "--scan-m", "7"],
        vec!["--tomography", "/nonexistent/counts.csv", "--pairs", "100"],
    ] {
        let out = run_err(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn malformed_scenario_fields_exit_with_code_2() {
    let path = temp_path("bad_scenario.json");
    std::fs::write(&path, r#"{ "meter": {"r_h": 0.5, "r_v": 0.5} }"#).unwrap();
    let out = run_err(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("meter"));

    std::fs::write(
        &path,
        r#"{ "theta_grid": {"start": 0, "stop": 10, "step": -1} }"#,
    )
    .unwrap();
    let out = run_err(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&path, r#"{ "unknown_field": 1 }"#).unwrap();
    let out = run_err(&["--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonhermitian_state_file_warns_but_runs() {
    let rho_path = temp_path("warn_state.json");
    // Off-diagonal asymmetry above the warning threshold.
    std::fs::write(
        &rho_path,
        r#"[[[0.5,0],[0.1,0],[0,0],[0,0]],
           [[0.1000001,0],[0.5,0],[0,0],[0,0]],
           [[0,0],[0,0],[0,0],[0,0]],
           [[0,0],[0,0],[0,0],[0,0]]]"#,
    )
    .unwrap();
    let scenario_path = temp_path("warn_scenario.json");
    std::fs::write(
        &scenario_path,
        format!(
            r#"{{ "state": {{"file": {rho_path:?}}},
                  "meter": {{"r_h": 0.0390, "r_v": 0.175}},
                  "theta_grid": {{"start": 0, "stop": 1, "step": 1}} }}"#
        ),
    )
    .unwrap();
    let out = lgsim()
        .args(["--scenario", scenario_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetrized"));
}
