use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photonic-ising"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_manifest(dir: &Path, body: &str) -> String {
    let p = dir.join("manifest.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

/// Strips the comment header, which carries the output-independent stamp.
fn csv_body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn mobius_exact_tier_reaches_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"problem": {"generator": "mobius-ladder", "n": 20}, "tier": "exact",
            "anneal": {"n_step": 30, "n_temp": 20, "eta": 0.9, "t0": 0.26},
            "runs": 100, "seed": 20, "output": "out"}"#,
    );
    let out = run(&["solve", &m]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("out/summary.json"));
    assert_eq!(s["best_h"], -26.0);
    assert_eq!(s["reference_method"], "brute-force");
    assert!(s["final_probability"].as_f64().unwrap() >= 0.95);
    assert_eq!(s["k_mean"], 1.0);
    assert_eq!(s["seed"], 20);
    assert_eq!(s["schema_version"], 1);
}

#[test]
fn same_manifest_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"problem": {"generator": "random-glass", "n": 10, "seed": 3}, "tier": "noisy",
            "anneal": {"n_step": 10, "n_temp": 10, "eta": 0.85}, "runs": 8, "seed": 4, "output": "a"}"#,
    );
    assert_eq!(code(&run(&["solve", &m])), 0);
    assert_eq!(code(&run(&["solve", &m, "--out", &dir.path().join("b").to_string_lossy()])), 0);
    for f in ["traces.csv", "probability.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let text = fs::read_to_string(dir.path().join("a/traces.csv")).unwrap();
    let bytes = fs::read(&m).unwrap();
    let hash = json(&dir.path().join("a/summary.json"))["manifest_sha256"].as_str().unwrap().to_string();
    assert!(text.contains(&format!("# manifest_sha256={hash}")));
    assert_eq!(hash.len(), 64);
    // a one-byte edit changes the stamp but, with the same seed, not the data
    let mut edited = bytes.clone();
    edited.push(b'\n');
    fs::write(&m, edited).unwrap();
    assert_eq!(code(&run(&["solve", &m, "--out", &dir.path().join("c").to_string_lossy()])), 0);
    let c_hash = json(&dir.path().join("c/summary.json"))["manifest_sha256"].as_str().unwrap().to_string();
    assert_ne!(hash, c_hash);
    assert_eq!(csv_body(&dir.path().join("a/traces.csv")), csv_body(&dir.path().join("c/traces.csv")));
}

#[test]
fn trace_rows_cover_every_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"problem": {"generator": "random-glass", "n": 8, "seed": 1}, "tier": "ideal",
            "anneal": {"n_step": 4, "n_temp": 5, "eta": 0.8}, "runs": 3, "seed": 2, "output": "o"}"#,
    );
    assert_eq!(code(&run(&["solve", &m])), 0);
    let body = csv_body(&dir.path().join("o/traces.csv"));
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run,iteration,stage,temperature,h_evaluator,h_exact,accepted,flip_count,h_proposed"
    );
    assert_eq!(lines.count(), 3 * (20 + 1));
    let curve = csv_body(&dir.path().join("o/probability.csv"));
    assert_eq!(curve.lines().count(), 1 + 20);
}

#[test]
fn edge_list_file_resolves_relative_to_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("problems")).unwrap();
    // triangle with one ferromagnetic and two antiferromagnetic bonds
    fs::write(dir.path().join("problems/tri.json"), r#"{"n": 3, "edges": [[0, 1, 1.0], [1, 2, -1.0], [0, 2, -1.0]]}"#).unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"problem": "problems/tri.json", "tier": "exact",
            "anneal": {"n_step": 5, "n_temp": 5, "eta": 0.8}, "runs": 4, "seed": 1, "output": "o"}"#,
    );
    let out = bin().args(["solve", &m]).current_dir("/").output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // σ = (+, +, −) satisfies all three bonds: H = −Σ_{i<j} J_ij σ_i σ_j = −3
    assert_eq!(json(&dir.path().join("o/summary.json"))["reference_h"], -3.0);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write_manifest(
        dir.path(),
        r#"{"problem": "nowhere.json", "tier": "exact",
            "anneal": {"n_step": 5, "n_temp": 5, "eta": 0.8}, "runs": 4, "seed": 1, "output": "o"}"#,
    );
    let out = run(&["solve", &missing]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));

    let bad_eta = write_manifest(
        dir.path(),
        r#"{"problem": {"generator": "mobius-ladder", "n": 8}, "tier": "exact",
            "anneal": {"n_step": 5, "n_temp": 5, "eta": 1.5}, "runs": 4, "seed": 1, "output": "o"}"#,
    );
    assert_eq!(code(&run(&["solve", &bad_eta])), 2);
    assert_eq!(code(&run(&["solve", &dir.path().join("absent.json").to_string_lossy()])), 2);
    assert_eq!(code(&run(&["oracle"])), 2);
    assert_eq!(code(&run(&["oracle", "--mobius", "8", "--glass", "8"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn capacity_errors_exit_3() {
    let out = run(&["oracle", "--glass", "30"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("maximum 24"));
    assert_eq!(code(&run(&["oracle", "--mobius", "12", "--cap", "10"])), 3);
}

#[test]
fn oracle_reports_ground_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    assert_eq!(code(&run(&["oracle", "--mobius", "20", "--out", &path.to_string_lossy()])), 0);
    let v = json(&path);
    assert_eq!(v["h_min"], -26.0);
    let g = v["ground_state"].as_str().unwrap();
    let p = v["partner_state"].as_str().unwrap();
    assert_eq!(g.len(), 20);
    assert!(g.chars().zip(p.chars()).all(|(a, b)| a != b));
}

#[test]
fn noise_report_matches_camera_budget() {
    let out = run(&["report", "noise"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["delta_q"].as_f64().unwrap().round(), 21.0);
    assert_eq!(v["delta_d"].as_f64().unwrap().round(), 79.0);
    assert_eq!(v["delta_r"], 1000.0);
    assert!((v["delta_h"].as_f64().unwrap() - 2276.0).abs() < 2276.0 * 0.01);
}

#[test]
fn perf_and_geometry_reports() {
    let dir = tempfile::tempdir().unwrap();
    let perf = dir.path().join("perf.json");
    assert_eq!(code(&run(&["report", "perf", "--out", &perf.to_string_lossy()])), 0);
    let v = json(&perf);
    assert_eq!(v["flops"], 1860);
    assert!((v["rate"].as_f64().unwrap() / 1e3 - 5.81).abs() < 0.01);
    assert!((v["e_ff"].as_f64().unwrap() * 1e3 - 2.75).abs() < 0.01);

    let out = run(&["report", "geometry"]);
    let g: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cap = g["capacity"].as_f64().unwrap();
    assert!((cap - 36.0).abs() <= 0.2 * 36.0, "capacity {cap}");
    assert!((g["w0"].as_f64().unwrap() - 431e-6).abs() < 431e-6 * 0.005);
}

#[test]
fn noiseless_calibration_recovers_injected_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["calibrate", "--n", "10", "--inject", "5", "--noiseless", "--out", &dir.path().to_string_lossy()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("calibration.json"));
    assert!(s["phase_error_max"].as_f64().unwrap() < 1e-6);
    assert!(s["fidelity_calibrated"].as_f64().unwrap() > 0.999);
    assert!(s["fidelity_uncalibrated"].as_f64().unwrap() < s["fidelity_calibrated"].as_f64().unwrap());
    let t = json(&dir.path().join("tables.json"));
    assert_eq!(t["tables"]["delta_phi"].as_array().unwrap().len(), 10);
    assert_eq!(t["tables"]["slm0_input"].as_array().unwrap().len(), 10);
}

#[test]
fn holo_exports_png_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("slm1.png");
    let out = run(&["holo", "--toy", "4", "--role", "split1", "--mobius", "4", "--spins", "+-+-", "--out", &png.to_string_lossy()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(&png).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
    // IHDR width and height, big endian
    let w = u32::from_be_bytes(bytes[16..20].try_into().unwrap());
    let h = u32::from_be_bytes(bytes[20..24].try_into().unwrap());
    assert_eq!((w, h), (256, 256));
    let side = json(&png.with_extension("json"));
    assert_eq!(side["role"], "split1");
    assert_eq!(side["n"], 4);
    assert_eq!(code(&run(&["holo", "--toy", "4", "--role", "split1", "--spins", "++", "--out", &png.to_string_lossy()])), 2);
}

#[test]
fn physical_tier_solves_three_spins() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), r#"{"matrix": [[0, 1, 0.5], [1, 0, 0.2], [0.5, 0.2, 0]]}"#).unwrap();
    let m = write_manifest(
        dir.path(),
        r#"{"problem": "p.json", "tier": "physical",
            "anneal": {"n_step": 5, "n_temp": 5, "eta": 0.8, "t0": 0.5}, "runs": 3, "seed": 9, "output": "o"}"#,
    );
    let out = run(&["solve", &m]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("o/summary.json"));
    assert_eq!(s["tier"], "physical");
    // calibrated diffraction chain reads the Hamiltonian in model units
    let k = s["k_mean"].as_f64().unwrap();
    assert!((k - 1.0).abs() < 0.05, "K = {k}");
    assert_eq!(s["best_h"], s["reference_h"]);
}
