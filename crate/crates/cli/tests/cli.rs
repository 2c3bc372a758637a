//! End-to-end tests of the `biphoton` binary: exit codes, file emission,
//! CSV invariants, and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference_device.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn run_scenario(scenario: &str, out: &Path, seed: Option<u64>) -> Output {
    let config = reference_config();
    let mut args = vec![
        "run".to_string(),
        scenario.to_string(),
        "--config".to_string(),
        config.display().to_string(),
        "--out".to_string(),
        out.display().to_string(),
    ];
    if let Some(s) = seed {
        args.push("--seed".to_string());
        args.push(s.to_string());
    }
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(&args)
        .output()
        .expect("binary should launch")
}

/// Rows of a CSV file as parsed floats, skipping comments and the header.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if header.is_empty() {
            header = line.split(',').map(|s| s.to_string()).collect();
        } else {
            rows.push(line.split(',').map(|v| v.parse::<f64>().unwrap()).collect());
        }
    }
    (header, rows)
}

#[test]
fn validate_accepts_the_reference_config() {
    let out = run(&["validate", "--config", reference_config().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_rejects_missing_section_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_config()).unwrap();
    let broken = text.replace("[detection]", "[detection_typo]");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("detection"), "stderr: {stderr}");
}

#[test]
fn validate_names_the_field_for_semantic_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(reference_config()).unwrap();
    let broken = text.replace("TE00 = 0.3", "TE00 = -0.3");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let fields: Vec<String> = report["issues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["field"].as_str().unwrap().to_string())
        .collect();
    assert!(fields.iter().any(|f| f.contains("loss_db_per_cm.TE00")), "fields: {fields:?}");
}

#[test]
fn unreadable_config_exits_2() {
    let out = run(&["validate", "--config", "/nonexistent/ncoconf.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shg_spectrum_peaks_at_the_phase_matching_wavelength() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("shg-spectrum", dir.path(), None);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("shg_spectrum.csv"));
    assert_eq!(header, vec!["lambda_nm", "p_sh_w", "relative_efficiency"]);
    let peak = rows
        .iter()
        .max_by(|a, b| a[1].total_cmp(&b[1]))
        .expect("spectrum rows");
    assert!((peak[0] - 1534.0).abs() <= 0.1, "peak at {} nm", peak[0]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert!((summary["lambda_pm_nm"].as_f64().unwrap() - 1534.0).abs() < 0.01);
    assert!(
        summary["suppression_budget"]["total_min_suppression_db"].as_f64().unwrap() > 36.0
    );
}

#[test]
fn car_vs_bandwidth_follows_the_inverse_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("car-vs-bandwidth", dir.path(), None);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("car_vs_bandwidth.csv"));
    assert_eq!(header[0], "bandwidth_nm");
    // Log-log slope from the emitted data.
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].ln(), r[1].ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    assert!((slope + 1.0).abs() <= 0.05, "slope = {slope}");

    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("car_fit.json")).unwrap())
            .unwrap();
    let a = fit["inverse_law_coefficient"].as_f64().unwrap();
    assert!((a - 388.0).abs() < 38.8, "coefficient = {a}");
}

#[test]
fn every_scenario_emits_commented_csv_with_headers_and_a_manifest() {
    for scenario in [
        "shg-spectrum",
        "raman-fit",
        "dp-power-sweep",
        "car-vs-bandwidth",
        "pump-optimize",
        "cwe-trajectory",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_scenario(scenario, dir.path(), Some(7));
        assert!(
            out.status.success(),
            "{scenario} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let manifest_path = dir.path().join("manifest.json");
        assert!(manifest_path.exists(), "{scenario}: manifest missing");
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(manifest["scenario"], scenario);
        assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);

        for entry in std::fs::read_dir(dir.path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let text = std::fs::read_to_string(&path).unwrap();
            assert!(
                text.lines().any(|l| l.starts_with("# config_sha256")),
                "{scenario}: {} lacks the config hash comment",
                path.display()
            );
            let header = text
                .lines()
                .find(|l| !l.starts_with('#') && !l.is_empty())
                .unwrap_or_default()
                .to_string();
            assert!(
                header.split(',').count() >= 2 || path.file_name().unwrap() == "jsa.csv",
                "{scenario}: {} lacks a header row",
                path.display()
            );
        }
    }
}

#[test]
fn sp_vs_dp_reports_the_forty_db_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("sp-vs-dp", dir.path(), Some(11));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("sp_vs_dp_summary.json")).unwrap(),
    )
    .unwrap();
    let analytic_gap = summary["analytic"]["gap_db"].as_f64().unwrap();
    assert!((analytic_gap - 40.0).abs() <= 1.0, "analytic gap = {analytic_gap}");
    let mc_gap = summary["monte_carlo"]["mean_gap_db"].as_f64().unwrap();
    assert!((mc_gap - 40.0).abs() <= 1.5, "MC gap = {mc_gap}");
    let dp_slope = summary["monte_carlo"]["dp_fit"]["slope"].as_f64().unwrap();
    assert!((dp_slope - 2.0).abs() < 0.2, "DP slope = {dp_slope}");
    assert!(dir.path().join("dp_histogram.csv").exists());
    assert!(dir.path().join("sp_histogram.csv").exists());
}

#[test]
fn pump_optimize_respects_the_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("pump-optimize", dir.path(), None);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let placement: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("pump_placement.json")).unwrap(),
    )
    .unwrap();
    assert!(placement["suppression_db"].as_f64().unwrap() > 36.0);
    let d = placement["lambda_d_nm"].as_f64().unwrap();
    for key in ["lambda1_nm", "lambda2_nm"] {
        let det = (placement[key].as_f64().unwrap() - d).abs();
        assert!((5.0..=50.0).contains(&det), "{key} detuning {det}");
    }
}

#[test]
fn identical_config_and_seed_give_byte_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run_scenario("sp-vs-dp", dir.path(), Some(99));
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name == "manifest.json" {
            continue; // carries the wall-clock timestamp
        }
        let other = b.path().join(&name);
        assert!(other.exists(), "{name} missing from second run");
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&other).unwrap(),
            "{name} differs between identical runs"
        );
        compared += 1;
    }
    assert!(compared >= 4, "expected several output files, saw {compared}");
}
