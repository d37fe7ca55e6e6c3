use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

/// Runs the binary with whitespace-separated `args`, plus `--out dir` when given.
fn cornerflow(args: &str, out: Option<&Path>) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cornerflow"));
    cmd.args(args.split_whitespace());
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().expect("binary runs").status.code().expect("exit code")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn shoot_writes_manifest_and_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let args = "shoot --u0 0.024 --bracket -0.018 -0.017 --x-min -5 --dx 1e-4 --stride 100";
    assert_eq!(cornerflow(args, Some(&out)), 0);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "shoot");
    assert_eq!(m["config"]["u0"], 0.024);
    let text = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(text.starts_with("x,u,v,gamma\n"));
    // every float in scientific notation with 16 fractional digits
    let first = text.lines().nth(1).unwrap();
    for field in first.split(',') {
        let mantissa = field.split('e').next().unwrap();
        assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16, "{field}");
    }
}

#[test]
fn runs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let args = "raster --u0-range -1 1 --v0-range -1 1 --counts 5 4 --dx 1e-3";
        assert_eq!(cornerflow(args, Some(&out)), 0);
        fs::read(out.join("raster.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("raster.json");
    fs::write(&cfg, r#"{"counts": [3, 3], "dx": 1e-3, "x_max": 10}"#).unwrap();
    let out = tmp.path().join("run");
    let args = format!("raster --config {} --counts 4 2", cfg.display());
    assert_eq!(cornerflow(&args, Some(&out)), 0);
    assert_eq!(csv_rows(&out.join("raster.csv")), 8);
    let m = manifest(&out);
    assert_eq!(m["config"]["x_max"], 10.0);
}

#[test]
fn rejected_configs_leave_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // forward time step
    assert_eq!(cornerflow("evolve --dt 1e-4", Some(&out)), 64);
    assert!(!out.exists());
    // grid size that is not a power of two
    assert_eq!(cornerflow("build-profile --n 5000", Some(&out)), 64);
    assert!(!out.exists());
    // unknown key in the config file
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"u0": 0.5, "v0": 0.1, "colour": "red"}"#).unwrap();
    assert_eq!(cornerflow(&format!("shoot --config {}", cfg.display()), Some(&out)), 64);
    assert!(!out.exists());
    // missing input file
    assert_eq!(cornerflow("scan --samples /nonexistent/pairs.csv", Some(&out)), 64);
    assert!(!out.exists());
}

#[test]
fn runtime_failures_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(cornerflow("shoot --u0 0.72 --bracket 2 3 --dx 1e-3", Some(&out)), 2);
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("bracket"));
}

#[test]
fn usage_errors_do_not_collide_with_run_codes() {
    assert_eq!(cornerflow("shoot --no-such-flag", None), 64);
    assert_eq!(cornerflow("--help", None), 0);
}

#[test]
fn build_then_evolve_from_stored_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let built = tmp.path().join("built");
    assert_eq!(cornerflow("build-profile --experiment 1", Some(&built)), 0);
    let profile = built.join("profile.json");
    assert!(profile.exists());
    let evolved = tmp.path().join("evolved");
    let args = format!(
        "evolve --profile {} --dt -1e-3 --t-end 0.9 --cadence 20 --snapshot-times 0.95",
        profile.display()
    );
    assert_eq!(cornerflow(&args, Some(&evolved)), 0);
    assert_eq!(csv_rows(&evolved.join("diagnostics.csv")), 6);
    assert!(evolved.join("snapshot_000.json").exists());
    assert!(evolved.join("final.json").exists());
    let m = manifest(&evolved);
    assert_eq!(m["status"], "ok");
}
