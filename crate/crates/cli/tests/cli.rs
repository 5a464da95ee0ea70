//! Black-box tests of the installed binary: determinism, diagnostics and the
//! schedule round trip through real files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-stc"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = bin().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    fs::write(&path, "[link]\npayload_symbols = 16\n").unwrap();
    path
}

#[test]
fn pattern_reports_reference_gain() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&["--out", "o", "pattern"], tmp.path());
    let summary = fs::read_to_string(tmp.path().join("o/pattern_summary.txt")).unwrap();
    let gain: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("beamforming_gain_db = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((19.0..=25.0).contains(&gain), "gain {gain}");
    for name in ["pattern_steered.csv", "pattern_uniform.csv"] {
        let text = fs::read_to_string(tmp.path().join("o").join(name)).unwrap();
        assert!(text.starts_with("theta_deg,power_db\n"));
        assert_eq!(text.lines().count(), 1802);
    }
}

#[test]
fn single_element_pattern_has_no_gain() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("one.toml"),
        "[geometry]\nrows = 1\ncols = 1\n",
    )
    .unwrap();
    run_ok(&["--config", "one.toml", "--out", "o", "pattern"], tmp.path());
    let summary = fs::read_to_string(tmp.path().join("o/pattern_summary.txt")).unwrap();
    let gain: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("beamforming_gain_db = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(gain.abs() < 1e-9, "gain {gain}");
}

#[test]
fn link_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_small_config(tmp.path());
    let cfg = cfg.file_name().unwrap().to_str().unwrap();
    run_ok(&["--config", cfg, "--out", "a", "link"], tmp.path());
    run_ok(&["--config", cfg, "--out", "b", "link"], tmp.path());
    for name in [
        "joint_waveform.csv",
        "joint_spectrum.csv",
        "joint_constellation.csv",
        "timeonly_waveform.csv",
        "timeonly_spectrum.csv",
        "timeonly_constellation.csv",
        "link_report.txt",
    ] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn no_noise_link_is_error_free() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_small_config(tmp.path());
    let cfg = cfg.file_name().unwrap().to_str().unwrap();
    run_ok(
        &["--config", cfg, "--out", "o", "--no-noise", "link"],
        tmp.path(),
    );
    let report = fs::read_to_string(tmp.path().join("o/link_report.txt")).unwrap();
    assert!(report.contains("snr_db = inf"));
    for line in report.lines().filter(|l| l.contains("ber = ")) {
        assert!(line.contains("ber = 0.000000e0"), "{line}");
    }
}

#[test]
fn seed_flag_changes_payload() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_small_config(tmp.path());
    let cfg = cfg.file_name().unwrap().to_str().unwrap();
    run_ok(&["--config", cfg, "--out", "a", "--seed", "1", "codegen"], tmp.path());
    run_ok(&["--config", cfg, "--out", "b", "--seed", "2", "codegen"], tmp.path());
    let a = fs::read(tmp.path().join("a/payload_bits.txt")).unwrap();
    let b = fs::read(tmp.path().join("b/payload_bits.txt")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn unknown_config_key_is_diagnosed() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[geometry]\nspacing = 0.04\n").unwrap();
    let out = bin()
        .args(["--config", "bad.toml", "pattern"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("spacing"), "stderr: {stderr}");
}

#[test]
fn codegen_codecheck_round_trip_and_tamper_detection() {
    let tmp = tempfile::tempdir().unwrap();
    let payload = "00110110010110100101011000110101";
    run_ok(
        &["--out", "o", "codegen", "--payload-bits", payload],
        tmp.path(),
    );
    let out = run_ok(&["codecheck", "o/schedule.txt"], tmp.path());
    let recovered = String::from_utf8_lossy(&out.stdout);
    assert_eq!(recovered.trim(), payload);

    // flip one element bit inside the first payload symbol
    let path = tmp.path().join("o/schedule.txt");
    let mut text = fs::read_to_string(&path).unwrap();
    let body = text.find("---\n").unwrap() + 4;
    let line_len = 257;
    let tick = 13 * 200 + 40;
    let pos = body + tick * line_len + 123;
    let flipped = if text.as_bytes()[pos] == b'0' { "1" } else { "0" };
    text.replace_range(pos..pos + 1, flipped);
    fs::write(&path, text).unwrap();

    let out = bin()
        .args(["codecheck", "o/schedule.txt"])
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("tick 2640") && stderr.contains("symbol 13"),
        "stderr: {stderr}"
    );
}

#[test]
fn scan_csv_has_expected_header() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("s.toml"), "[scan]\ntargets_deg = [0.0, 30.0]\n").unwrap();
    run_ok(&["--config", "s.toml", "--out", "o", "scan"], tmp.path());
    let text = fs::read_to_string(tmp.path().join("o/scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "commanded_theta_deg,peak_theta_deg,gain_db"
    );
    assert_eq!(lines.count(), 2);
}
