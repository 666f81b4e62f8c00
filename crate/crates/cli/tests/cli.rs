//! End-to-end checks of the binary: emitted file shapes, exit codes, and
//! byte-level determinism of repeated runs with identical configs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_peakwave"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("peakwave-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

#[test]
fn profile_emits_601_rows_plus_header_and_hash() {
    let dir = tmp_dir("profile");
    let status = binary()
        .args([
            "profile",
            "--c",
            "1.03",
            "--n",
            "300",
            "--tol",
            "1e-14",
            "--out-dir",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&dir.join("profile.csv"))).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,eta,slope");
    assert!(lines.last().unwrap().starts_with("# config "));
    assert_eq!(lines.len(), 1 + 601 + 1, "header + 601 rows + hash comment");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir_a = tmp_dir("det-a");
    let dir_b = tmp_dir("det-b");
    for dir in [&dir_a, &dir_b] {
        for args in [
            vec!["profile", "--c", "1.05", "--n", "64"],
            vec![
                "evolve",
                "--delta",
                "0.01",
                "--t-end",
                "0.5",
                "--dt",
                "0.001",
                "--labels",
                "128",
            ],
            vec!["strip", "--n", "64", "--lambda-list", "0.3,2"],
            vec!["verify", "--only", "1"],
        ] {
            let status = binary().args(&args).arg("--out-dir").arg(dir).status().unwrap();
            assert!(status.success(), "command {args:?} failed");
        }
    }
    for name in [
        "profile.csv",
        "evolve.csv",
        "evolve_summary.json",
        "strip.csv",
        "verify_report.txt",
    ] {
        let a = read(&dir_a.join(name));
        let b = read(&dir_b.join(name));
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn env_var_overrides_out_dir() {
    let dir = tmp_dir("env");
    let status = binary()
        .args(["profile", "--c", "1.05", "--n", "32", "--out-dir", "/nonexistent-ignored"])
        .env("PEAKWAVE_OUT", &dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("profile.csv").exists());
}

#[test]
fn validation_errors_exit_with_code_1() {
    let dir = tmp_dir("bad");
    for args in [
        vec!["profile", "--c", "0.9"],
        vec!["profile", "--c", "1.5"],
        vec!["profile", "--c", "1.05", "--n", "4"],
        vec!["evolve", "--delta=-1"],
        vec!["strip", "--lambda-list", "zzz"],
    ] {
        let out = binary().args(&args).arg("--out-dir").arg(&dir).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(1),
            "expected validation failure for {args:?}"
        );
    }
}

#[test]
fn sweep_and_peaked_spectrum_produce_tables() {
    let dir = tmp_dir("tables");
    let status = binary()
        .args(["sweep", "--c-list", "1.02,1.06", "--out-dir"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = String::from_utf8(read(&dir.join("sweep.csv"))).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 3 + 1, "2 speeds + peaked endpoint");

    let status = binary()
        .args([
            "peaked-spectrum",
            "--n",
            "64",
            "--modes",
            "4",
            "--dump-matrix",
            "--out-dir",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let spec = String::from_utf8(read(&dir.join("peaked_spectrum.csv"))).unwrap();
    assert_eq!(spec.lines().count(), 1 + 8 + 1, "4 modes x 2 methods");
    let dump = String::from_utf8(read(&dir.join("peaked_matrix_fd.txt"))).unwrap();
    assert!(dump.starts_with("128 128 physical\n"));
    assert_eq!(dump.lines().count(), 1 + 128 * 128);
}

#[test]
fn spectrum_emits_rows_for_both_methods() {
    let dir = tmp_dir("spectrum");
    let status = binary()
        .args([
            "spectrum",
            "--c-list",
            "1.03",
            "--n",
            "48",
            "--method",
            "both",
            "--out-dir",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&dir.join("spectrum.csv"))).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 1, "one row per (c, method)");
    assert!(lines[1].contains(",fd,"));
    assert!(lines[2].contains(",fourier,"));
}
