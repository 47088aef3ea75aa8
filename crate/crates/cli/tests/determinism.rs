//! Acceptance criterion: every command with data outputs is byte-identical
//! across two consecutive invocations with the same seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iprox"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("iprox-determinism-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const CONFIG: &str = "\
[penalty]
name = sq_l2
dim = 2
gamma = 1.0

[approx]
kind = a
eps = 0.05
policy = random
seed = 7

[algorithm]
kind = fb
iterations = 60
x0 = 2.0, -1.0
f_diag = 1.0, 2.0
f_center = 1.0, -0.5

[schedule]
kind = constant
eps0 = 0.05
";

#[test]
fn run_outputs_are_byte_identical() {
    let root = tmp_dir("run");
    let cfg_path = root.join("exp.cfg");
    fs::write(&cfg_path, CONFIG).unwrap();
    let dirs = [root.join("one"), root.join("two")];
    for d in &dirs {
        let out = bin()
            .args(["run", "--config"])
            .arg(&cfg_path)
            .args(["--seed", "7", "--out-dir"])
            .arg(d)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["trace.csv", "manifest.json", "trace.svg"] {
        assert_eq!(read(&dirs[0], name), read(&dirs[1], name), "{name} differs between runs");
    }
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn verify_report_is_byte_identical() {
    let root = tmp_dir("verify");
    let dirs = [root.join("one"), root.join("two")];
    for d in &dirs {
        let out = bin()
            .args(["verify", "--filter", "scaling", "--seed", "11", "--jobs", "3", "--out-dir"])
            .arg(d)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read(&dirs[0], "report.json"), read(&dirs[1], "report.json"));
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn surface_outputs_are_byte_identical() {
    let root = tmp_dir("surface");
    let dirs = [root.join("one"), root.join("two")];
    for d in &dirs {
        let out = bin().args(["surface", "--out-dir"]).arg(d).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["surface.csv", "surface_fb.svg", "surface_pr.svg", "surface_dr.svg"] {
        assert_eq!(read(&dirs[0], name), read(&dirs[1], name), "{name} differs between runs");
    }
    let _ = fs::remove_dir_all(&root);
}

#[test]
fn bounds_stdout_is_identical_and_matches_the_table_row() {
    let one = bin().args(["bounds", "a", "0.1"]).output().unwrap();
    let two = bin().args(["bounds", "a", "0.1"]).output().unwrap();
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(String::from_utf8_lossy(&one.stdout).trim(), "sigma=0.1 L=L_psi gamma=0.2");
}

#[test]
fn exact_kind_reproduces_the_noise_free_trace() {
    let root = tmp_dir("exact");
    let cfg_path = root.join("exp.cfg");
    fs::write(&cfg_path, CONFIG.replace("kind = a", "kind = exact")).unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--out-dir"])
        .arg(&root)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&root, "manifest.json")).unwrap();
    let final_dist = manifest["final_dist"].as_f64().unwrap();
    assert!(final_dist < 1e-10, "exact run should converge to the fixed point, got {final_dist}");
    let _ = fs::remove_dir_all(&root);
}
