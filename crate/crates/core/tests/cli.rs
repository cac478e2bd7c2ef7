//! Exit codes and outputs of the command-line front end.

use std::fs;
use std::process::{Command, Output};

fn hydrosem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrosem")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn exported_presets_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in hydrosem::scenario::PRESET_NAMES {
        let out = hydrosem(&["preset", name, "--export"]);
        assert_eq!(code(&out), 0, "{name}");
        let path = dir.path().join(format!("{name}.ini"));
        fs::write(&path, &out.stdout).unwrap();
        let check = hydrosem(&["validate", path.to_str().unwrap()]);
        assert_eq!(code(&check), 0, "{name}: {}", String::from_utf8_lossy(&check.stderr));
    }
}

#[test]
fn configuration_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = String::from_utf8(hydrosem(&["preset", "sim2", "--export"]).stdout).unwrap();
    let path = dir.path().join("bad.ini");
    fs::write(&path, text.replace("px = 8", "px = 99")).unwrap();
    let out = hydrosem(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("px"));
    assert_eq!(code(&hydrosem(&["preset", "no_such_scenario"])), 2);
}

#[test]
fn missing_files_exit_with_4() {
    assert_eq!(code(&hydrosem(&["validate", "/nonexistent/scenario.ini"])), 4);
}

#[test]
fn an_oversized_step_diverges_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = hydrosem(&[
        "preset",
        "sim2",
        "--dt",
        "1.0",
        "--steps",
        "400",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn a_short_run_writes_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = hydrosem(&["preset", "sim2", "--steps", "5", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("5 steps"));
    let manifest = hydrosem::scenario::Manifest::read(dir.path()).unwrap();
    assert!(manifest.verify(dir.path()).is_empty());
    assert!(dir.path().join("config.ini").exists());
}
