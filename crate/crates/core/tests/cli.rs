use std::path::{Path, PathBuf};
use std::process::Command;

use qpoincare::cli::{sha256_hex, Manifest, RunConfig};
use qpoincare::dynamics::{evaluate_hamiltonian, PhasePoint};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpoincare"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bundled_configs_parse() {
    for name in ["two_shift.toml", "free.toml", "three_bump.toml", "three_disk.toml"] {
        RunConfig::load(&config(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn three_bump_hamiltonian_matches_direct_summation() {
    let cfg = RunConfig::load(&config("three_bump.toml")).unwrap();
    let sys = cfg.scattering_system().unwrap();
    let (x, xi) = ([0.3, 0.1], [0.2, -0.4]);
    let h = evaluate_hamiltonian(&sys, &PhasePoint::new(x, xi)).unwrap();
    let centers = [[0.0, 1.5], [-1.299038105676658, -0.75], [1.299038105676658, -0.75]];
    let mut v = 0.0;
    for c in centers {
        let d2: f64 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        v += (-d2 / (2.0 * 0.5 * 0.5)).exp();
    }
    let expected = 0.5 * (xi[0] * xi[0] + xi[1] * xi[1]) + v;
    assert!((h - expected).abs() < 1e-14, "{h} vs {expected}");
}

#[test]
fn two_shift_pressure_is_log_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let (code, err) = run(&["pressure", "--config", config("two_shift.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v = read_json(&out.join("pressure.json"));
    let value = v["value"].as_f64().unwrap();
    assert!((value - 2f64.ln()).abs() < 1e-10, "{value}");
    // constant roof 2 halves the pressure
    let flow = v["flow"][0]["value"].as_f64().unwrap();
    assert!((flow - 0.5 * 2f64.ln()).abs() < 1e-10, "{flow}");
    let orbit = v["orbit_sums"][0]["value"].as_f64().unwrap();
    assert!((orbit - 2f64.ln()).abs() < 0.01);
    assert!(out.join("ruelle.csv").exists());
}

#[test]
fn free_motion_has_an_empty_trapped_set() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("free");
    let (code, err) = run(&["simulate", "--config", config("free.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("trapped_set.csv")).unwrap();
    assert_eq!(csv.trim(), "t,x1,x2,xi1,xi2");
    let v = read_json(&out.join("trapped_set.json"));
    assert_eq!(v["samples"], 0);
    assert!(v["dimension"].is_null());
}

#[test]
fn manifest_hashes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let cfg = config("two_shift.toml");
    let (code, err) = run(&["pressure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(code, 0, "{err}");
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.subcommand, "pressure");
    assert_eq!(m.seed, 11);
    assert_eq!(m.config_sha256, sha256_hex(&std::fs::read(&cfg).unwrap()));
    let mut listed: Vec<&str> = m.artifacts.iter().map(|a| a.path.as_str()).collect();
    listed.sort();
    let mut on_disk: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    for a in &m.artifacts {
        let bytes = std::fs::read(out.join(&a.path)).unwrap();
        assert_eq!(a.sha256, sha256_hex(&bytes));
        assert_eq!(a.bytes, bytes.len() as u64);
    }
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();

    let p = write_config(tmp.path(), "[system]\nkind = \"three_disk\"\ncenter_distance = 6.0\nradius = 1.0\nbogus = 1\n");
    let (code, err) = run(&["simulate", "--config", p.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("bogus"), "{err}");

    let p = write_config(
        tmp.path(),
        "[system]\nkind = \"three_disk\"\ncenter_distance = 6.0\nradius = 1.0\n[quantum]\nh = [0.01, 0.02]\n[resonances]\nC = -1.0\n",
    );
    let (code, err) = run(&["quantize", "--config", p.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("quantum.h[1]") && err.contains("resonances.C"), "{err}");

    let p = write_config(tmp.path(), "[system]\nkind = \"symbolic\"\nmodel = \"two_shift\"\n");
    let (code, err) = run(&["simulate", "--config", p.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 1, "{err}");

    let (code, _) = run(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["explode", "--config", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    let (code, _) = run(&["--help"]);
    assert_eq!(code, 0);
}

#[test]
fn numeric_failure_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    // nothing is trapped, so there is nothing to section
    let (code, err) = run(&["section", "--config", config("free.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn failed_area_check_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("three_disk.toml")).unwrap();
    let text = text.replace("validation_points = 50", "validation_points = 5\narea_tol = 1e-300");
    let p = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    let (code, err) = run(&["section", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("area"), "{err}");
}

#[test]
fn section_checks_follow_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("three_disk.toml");
    let mut checks = Vec::new();
    let mut maps = Vec::new();
    for (k, seed) in ["1", "1", "2"].iter().enumerate() {
        let out = tmp.path().join(format!("s{k}"));
        let (code, err) = run(&["section", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed, "--threads", "1"]);
        assert_eq!(code, 0, "{err}");
        checks.push(std::fs::read(out.join("section_checks.json")).unwrap());
        maps.push(std::fs::read(out.join("return_map.json")).unwrap());
        let v = read_json(&out.join("section_checks.json"));
        assert!(v["area_max_deviation"].as_f64().unwrap() < 1e-6);
        assert_eq!(v["area_checks"].as_array().unwrap().len(), 50);
    }
    assert_eq!(checks[0], checks[1]);
    assert_ne!(checks[0], checks[2]);
    assert_eq!(maps[0], maps[2]);
}
