//! End-to-end runs of the `tcsl` binary.

use std::path::Path;
use std::process::{Command, Output};

fn tcsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcsl")).args(args).output().expect("spawn tcsl")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&tcsl(&["--help"])), 0);
    assert_eq!(code(&tcsl(&["simulate", "--help"])), 0);
    assert_eq!(code(&tcsl(&["teleport"])), 2);
    assert_eq!(code(&tcsl(&["simulate", "--solver", "magic"])), 2);
}

#[test]
fn validate_exit_codes() {
    let ok = tcsl(&["validate", "--scenario", "fig2ab"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("spin_adiabaticity"));

    let dir = tempfile::tempdir().unwrap();
    let lossy = dir.path().join("lossy.toml");
    std::fs::write(&lossy, "medium.gamma2 = 0.05\n").unwrap();
    assert_eq!(code(&tcsl(&["validate", "--scenario", lossy.to_str().unwrap()])), 3);

    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "medium.gamma_3 = 1000.0\n").unwrap();
    assert_eq!(code(&tcsl(&["validate", "--scenario", typo.to_str().unwrap()])), 2);
    assert_eq!(code(&tcsl(&["validate", "--scenario", "/no/such/file.toml"])), 2);
}

#[test]
fn simulate_writes_artifacts_and_manifest_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = tcsl(&[
        "simulate", "--scenario", "fig2cd", "--solver", "spectral", "--snapshots", "5,6,7",
        "--out", first.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let space_time = read(&first, "spectral_spacetime.csv");
    assert!(space_time.starts_with("t,z,re_a_plus"));
    assert_eq!(space_time.lines().count(), 1 + 3 * 400);
    let metrics = read(&first, "spectral_metrics.csv");
    assert_eq!(metrics.lines().count(), 4);
    let manifest = read(&first, "manifest.toml");
    assert!(manifest.contains("release_mode = \"backward\""));
    assert!(manifest.contains("run.solver = \"spectral\""));

    let second = dir.path().join("second");
    let replay = tcsl(&[
        "simulate", "--scenario", first.join("manifest.toml").to_str().unwrap(),
        "--out", second.to_str().unwrap(),
    ]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(read(&second, "spectral_spacetime.csv"), space_time);
    assert_eq!(read(&second, "manifest.toml"), manifest);
}

#[test]
fn dispersion_and_analytic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&tcsl(&["dispersion", "--out", d])), 0);
    let table = read(dir.path(), "dispersion.csv");
    assert!(table.starts_with("k,re_omega,im_omega,re_chi_minus,im_chi_minus"));
    assert_eq!(table.lines().count(), 1 + 1600);

    assert_eq!(code(&tcsl(&["analytic", "--out", d, "--snapshots", "5,7.5,10"])), 0);
    let table = read(dir.path(), "analytic.csv");
    let last: Vec<f64> = table.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 10.0);
    assert!((last[3] - 3f64.sqrt()).abs() < 0.02, "l = {}", last[3]);
    assert!((last[6] - 0.5774).abs() < 0.01, "P = {}", last[6]);
}

#[test]
fn compare_tables_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = tcsl(&["simulate", "--solver", "spectral", "--snapshots", "5,6", "--out", d]);
    assert_eq!(code(&out), 0);
    let table = dir.path().join("spectral_spacetime.csv");
    let t = table.to_str().unwrap();
    let same = tcsl(&["compare", "--reference", t, "--candidate", t, "--out", d]);
    assert_eq!(code(&same), 0, "{}", String::from_utf8_lossy(&same.stderr));
    assert!(String::from_utf8_lossy(&same.stdout).starts_with("aggregate_rel_l2 = 0.00000000e0"));

    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "a,b\n1,2\n").unwrap();
    let bad = tcsl(&["compare", "--reference", t, "--candidate", garbage.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&bad), 2);
}
