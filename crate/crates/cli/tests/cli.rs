use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn udm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udm")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV file after the header.
fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn grid(x: (f64, f64, usize), p: (f64, f64, usize)) -> String {
    format!(
        r#""grid": {{"x_min": {}, "x_max": {}, "nx": {}, "p_min": {}, "p_max": {}, "np": {}}}"#,
        x.0, x.1, x.2, p.0, p.1, p.2
    )
}

#[test]
fn wigner_ground_state_centre() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &format!(r#"{{"state": {{"coefficients": [[1, 0]]}}, {}}}"#, grid((-1.0, 1.0, 11), (-1.0, 1.0, 11))));
    let out = dir.path().join("w.csv");
    assert!(udm(&["wigner", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("x,p,W\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 121);
    let centre = &rows[60];
    assert_eq!((centre[0], centre[1]), (0.0, 0.0));
    assert!((centre[2] - 1.0 / PI).abs() < 1e-10);
    // x-major ordering
    assert_eq!(rows[1][0], -1.0);
    assert!((rows[1][1] + 0.8).abs() < 1e-15);
    let meta = json_file(&dir.path().join("w.csv.meta.json"));
    assert_eq!(meta["n_max"], 0);
    assert_eq!(meta["norm_shortfall"], 0.0);
    assert_eq!(meta["params"]["hbar"], 1.0);
}

#[test]
fn wigner_superposition_normalizes() {
    let dir = TempDir::new().unwrap();
    let c = FRAC_1_SQRT_2;
    let cfg = write(
        &dir,
        "c.json",
        &format!(r#"{{"state": {{"coefficients": [[{c}, 0], [{c}, 0]]}}, {}}}"#, grid((-8.0, 8.0, 201), (-8.0, 8.0, 201))),
    );
    let out = dir.path().join("w.json");
    assert!(udm(&["wigner", "--config", s(&cfg), "--out", s(&out), "--format", "json"]).status.success());
    let doc = json_file(&out);
    assert_eq!(doc["columns"], serde_json::json!(["x", "p", "W"]));
    let rows = doc["rows"].as_array().unwrap();
    let h = 16.0 / 200.0;
    let total: f64 = rows
        .iter()
        .map(|r| {
            let (x, p, w) = (r[0].as_f64().unwrap(), r[1].as_f64().unwrap(), r[2].as_f64().unwrap());
            let wx = if x.abs() == 8.0 { 0.5 } else { 1.0 };
            let wp = if p.abs() == 8.0 { 0.5 } else { 1.0 };
            wx * wp * w * h * h
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn diagonal_state_constant_on_circle() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &format!(r#"{{"state": {{"populations": [0.5, 0.3, 0.2]}}, {}}}"#, grid((-2.0, 2.0, 5), (-2.0, 2.0, 5))));
    let out = dir.path().join("w.csv");
    assert!(udm(&["wigner", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let on_circle: Vec<f64> = csv_rows(&out)
        .into_iter()
        .filter(|r| ((r[0] * r[0] + r[1] * r[1]) / 2.0 - 1.0).abs() < 1e-12)
        .map(|r| r[2])
        .collect();
    assert_eq!(on_circle.len(), 4);
    assert!(on_circle.iter().all(|v| (v - on_circle[0]).abs() < 1e-10));
}

#[test]
fn wigner_from_sampled_wavefunction() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x,re,im\n");
    for i in 0..=320 {
        let x = -8.0 + 0.05 * i as f64;
        csv.push_str(&format!("{x},{},0\n", PI.powf(-0.25) * (-x * x / 2.0).exp()));
    }
    write(&dir, "psi.csv", &csv);
    let cfg = write(
        &dir,
        "c.json",
        &format!(r#"{{"state": {{"wavefunction": "psi.csv", "n_max": 4}}, {}}}"#, grid((0.0, 1.0, 2), (0.0, 1.0, 2))),
    );
    let out = dir.path().join("w.csv");
    let run = udm(&["wigner", "--config", s(&cfg), "--out", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rows = csv_rows(&out);
    assert!((rows[0][2] - 1.0 / PI).abs() < 1e-9);
    let meta = json_file(&dir.path().join("w.csv.meta.json"));
    assert_eq!(meta["source"], "wavefunction");
    assert!(meta["norm_shortfall"].as_f64().unwrap() < 1e-10);
}

#[test]
fn basis_diagonal_pair_is_rotation_invariant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &format!("{{{}}}", grid((-1.0, 1.0, 3), (-1.0, 1.0, 3))));
    let out = dir.path().join("b.csv");
    assert!(udm(&["basis", "--config", s(&cfg), "--pair", "1,1", "--kind", "wc", "--out", s(&out)]).status.success());
    let rows = csv_rows(&out);
    for radius2 in [1.0, 2.0] {
        let ring: Vec<f64> = rows.iter().filter(|r| (r[0] * r[0] + r[1] * r[1] - radius2).abs() < 1e-12).map(|r| r[2]).collect();
        assert_eq!(ring.len(), 4);
        let mean = ring.iter().sum::<f64>() / 4.0;
        let var = ring.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(var <= 1e-12);
    }
    let meta = json_file(&dir.path().join("b.csv.meta.json"));
    assert_eq!(meta["winding"], 0);
}

#[test]
fn basis_winding_metadata_and_bad_pair() {
    let out = udm(&["basis", "--pair", "5,20", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["winding"], -15);
    assert_eq!(udm(&["basis", "--pair", "5"]).status.code(), Some(2));
}

#[test]
fn poly_table_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    assert!(udm(&["poly-table", "--nmax", "2", "--kmax", "2", "--x-min", "-2", "--x-max", "2", "--nx", "401", "--out", s(&out)])
        .status
        .success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 9 * 401);
    let block = |n: usize, k: usize| -> &[Vec<f64>] {
        let start = (n * 3 + k) * 401;
        &rows[start..start + 401]
    };
    for r in block(0, 0) {
        assert!((r[3] - (-r[2] * r[2]).exp()).abs() < 1e-15);
    }
    let b = block(1, 1);
    let roots: Vec<f64> = b
        .windows(2)
        .filter(|w| w[0][3] * w[1][3] < 0.0)
        .map(|w| w[0][2] - w[0][3] * (w[1][2] - w[0][2]) / (w[1][3] - w[0][3]))
        .collect();
    assert_eq!(roots.len(), 2);
    assert!((roots[0] + FRAC_1_SQRT_2).abs() < 1e-3 && (roots[1] - FRAC_1_SQRT_2).abs() < 1e-3);
    for n in 0..3 {
        for k in 0..3 {
            let b = block(n, k);
            let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..401 {
                assert!((b[i][3] - sign * b[400 - i][3]).abs() <= 1e-15 * b[i][3].abs().max(1.0));
            }
        }
    }
}

#[test]
fn energy_reports() {
    let dir = TempDir::new().unwrap();
    let harmonic = write(&dir, "h.json", r#"{"state": {"coefficients": [[1, 0]]}}"#);
    let out = udm(&["energy", "--config", s(&harmonic), "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["energy"]["total"].as_f64().unwrap() - 0.5).abs() < 1e-14);

    let quartic = write(&dir, "q.json", r#"{"state": {"coefficients": [[1, 0]]}, "potential": {"coeffs": [0, 0, 0, 0, 0.1]}}"#);
    let out = udm(&["energy", "--config", s(&quartic), "--format", "json", "--verify"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["energy"]["total"].as_f64().unwrap() - 0.575).abs() < 1e-12);
    assert_eq!(doc["admissible_diagonals"], serde_json::json!([-4, -2, 0, 2, 4]));
    assert!(doc["verify"]["relative_gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(doc["verify"]["passed"], true);

    let mixed = write(&dir, "m.json", r#"{"state": {"populations": [0.5, 0.5]}}"#);
    assert_eq!(udm(&["energy", "--config", s(&mixed)]).status.code(), Some(1));
}

#[test]
fn dissipation_fields() {
    let dir = TempDir::new().unwrap();
    let g = grid((-1.0, 1.0, 5), (-5.0, 5.0, 1001));
    let harmonic = write(&dir, "h.json", &format!("{{{g}}}"));
    let out = dir.path().join("h");
    assert!(udm(&["dissipation", "--config", s(&harmonic), "--out", s(&out)]).status.success());
    let q2 = csv_rows(&out.join("q2.csv"));
    assert_eq!(q2.len(), 5 * 1001);
    assert!(q2.iter().all(|r| r[2] == 0.0));

    let (mu, sigma) = (0.2f64, 1.1f64);
    let quartic = write(
        &dir,
        "q.json",
        &format!(r#"{{"potential": {{"coeffs": [0, 0, 0, 0, {mu}]}}, "fixture": {{"kind": "gaussian", "sigma": {sigma}}}, {g}}}"#),
    );
    let out = dir.path().join("q");
    assert!(udm(&["dissipation", "--config", s(&quartic), "--out", s(&out)]).status.success());
    let profile = csv_rows(&out.join("mean_q2.csv"));
    assert!(profile.iter().all(|r| r[1].abs() <= 1e-8));
    // Q₂ = (1/24)·24μx·2v/σ⁴ for the Gaussian in v
    let q2 = csv_rows(&out.join("q2.csv"));
    let mut checked = 0;
    for r in &q2 {
        if r[2].is_nan() {
            continue;
        }
        let want = (1.0 / 24.0) * 24.0 * mu * r[0] * 2.0 * r[1] / sigma.powi(4);
        assert!((r[2] - want).abs() < 1e-7, "{r:?}");
        checked += 1;
    }
    assert!(checked > 5 * 980);
    let summary = json_file(&out.join("summary.json"));
    assert!(summary["global_q2"].as_f64().unwrap().abs() < 1e-8);
    assert!(summary["h2"].as_f64().is_some());

    let out = dir.path().join("c");
    assert!(udm(&["dissipation", "--config", s(&quartic), "--classical", "--out", s(&out)]).status.success());
    assert!(csv_rows(&out.join("q2.csv")).iter().all(|r| r[2] == 0.0));
    for r in csv_rows(&out.join("accel.csv")) {
        assert_eq!(r[2], -(r[0] + 4.0 * mu * r[0].powi(3)));
    }
}

#[test]
fn verify_exit_codes_and_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let run = udm(&["verify", "--suite", "udm", "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(0));
    let report = json_file(&out);
    assert_eq!(report["passed"], true);
    let check = &report["suites"][0]["checks"][0];
    assert!(check["max_deviation"].as_f64().unwrap() <= check["tolerance"].as_f64().unwrap());

    let run = udm(&["verify", "--suite", "udm", "--perturb-hbar", "1.01", "--out", s(&out)]);
    assert_ne!(run.status.code(), Some(0));
    assert_eq!(json_file(&out)["passed"], false);

    assert_eq!(udm(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn verify_basis_sign_changes() {
    let run = udm(&["verify", "--suite", "winding"]);
    assert!(run.status.success());
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    let details: Vec<&str> = report["suites"][0]["checks"].as_array().unwrap().iter().filter_map(|c| c["detail"].as_str()).collect();
    assert_eq!(details, ["6 (expected 6)", "30 (expected 30)"]);
}

#[test]
fn output_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        &format!(r#"{{"state": {{"coefficients": [[0.6, 0], [0, 0.8]]}}, {}}}"#, grid((-3.0, 3.0, 31), (-3.0, 3.0, 31))),
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(udm(&["wigner", "--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(udm(&["wigner", "--config", s(&cfg), "--out", s(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let j1 = udm(&["wigner", "--config", s(&cfg), "--format", "json"]).stdout;
    let j2 = udm(&["wigner", "--config", s(&cfg), "--format", "json"]).stdout;
    assert_eq!(j1, j2);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"grid": {"x_min": 1, "x_max": -1, "nx": 5, "p_min": 0, "p_max": 1, "np": 5}}"#);
    assert_eq!(udm(&["wigner", "--config", s(&bad)]).status.code(), Some(2));
    let empty = write(&dir, "empty.json", r#"{"state": {"coefficients": []}}"#);
    assert_eq!(udm(&["wigner", "--config", s(&empty)]).status.code(), Some(2));
    let missing = write(&dir, "m.json", r#"{"state": {"wavefunction": "absent.csv"}}"#);
    assert_eq!(udm(&["wigner", "--config", s(&missing)]).status.code(), Some(2));
    assert_eq!(udm(&["wigner", "--config", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn unnormalized_coefficients_warn() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &format!(r#"{{"state": {{"coefficients": [[0.5, 0]]}}, {}}}"#, grid((-1.0, 1.0, 3), (-1.0, 1.0, 3))));
    let out = dir.path().join("w.csv");
    let run = udm(&["wigner", "--config", s(&cfg), "--out", s(&out)]);
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("warning"));
    let meta = json_file(&dir.path().join("w.csv.meta.json"));
    assert!((meta["norm_shortfall"].as_f64().unwrap() - 0.75).abs() < 1e-15);
    assert_eq!(meta["normalized"], false);
}
