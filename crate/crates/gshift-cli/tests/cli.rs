//! Command-line contract: exit codes, stamp gating, output shapes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gshift"))
}

const REFERENCE_KERNEL: &str = "sigma = one-minus-x-squared\nco_exponent = 2\n\
    idx_x_a = 2\nidx_x_b = 2\nidx_y_a = 0\nidx_y_b = 4\n";

/// Low-resolution run config for fast CLI exercises.
fn write_config(dir: &Path, kernel: &str, functions: &str, extra: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("kernel.conf"), kernel).unwrap();
    let cfg = format!(
        "kernel_spec = kernel.conf\np = inf\nalpha = 1.0\nfunctions = {}\nn_max = 8\n{}\
         [resolution]\nshift_nodes = 64\nnorm_nodes = 128\nsup_samples = 129\nfj_nodes = 128\n",
        functions, extra
    );
    let path = dir.join("run.conf");
    std::fs::write(&path, cfg).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("GSHIFT_CONFIG").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

#[test]
fn missing_config_file_is_usage_error() {
    let out = run(&["--config", "/definitely/not/here.conf", "selftest"]);
    assert_eq!(code(&out), 2, "{:?}", out);
}

#[test]
fn missing_kernel_spec_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "kernel_spec = absent.conf\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "selftest"]);
    assert_eq!(code(&out), 2, "{:?}", out);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "definitely_not_a_key = 1\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "selftest"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn selftest_reference_passes_and_writes_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE_KERNEL, "exp_x", "");
    let outdir = dir.path().join("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "selftest",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(outdir.join(".selftest_ok").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("selftest_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["selftest"]["pass"], serde_json::Value::Bool(true));
    assert!(report["kernel_fingerprint"].as_str().unwrap().len() == 64);
    assert!(report["probe"]["max_ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn selftest_detects_corrupted_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "sigma = power\nsigma_exp_minus = 2\nsigma_exp_plus = 2\nco_exponent = 2\n\
               idx_x_a = 2\nidx_x_b = 2\nidx_y_a = 0\nidx_y_b = 4\n";
    let cfg = write_config(dir.path(), bad, "exp_x", "");
    let outdir = dir.path().join("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "selftest",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("selftest_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["selftest"]["pass"], serde_json::Value::Bool(false));
    assert!(report["selftest"]["max_err_unit"].as_f64().unwrap() > 1e-8);
    assert!(!outdir.join(".selftest_ok").exists());
}

#[test]
fn curves_require_stamp_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE_KERNEL, "exp_x", "");
    let outdir = dir.path().join("out");
    let blocked = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "curves",
    ]);
    assert_eq!(code(&blocked), 2);

    let forced = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "--force",
        "curves",
    ]);
    assert_eq!(code(&forced), 0, "{}", String::from_utf8_lossy(&forced.stderr));
    let errors_csv = std::fs::read_to_string(outdir.join("exp_x.errors.csv")).unwrap();
    // 3 comment/header lines + one row per n
    let rows = errors_csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("curves_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(rows, manifest["n_values"].as_array().unwrap().len());
    assert!(outdir.join("exp_x.modulus.csv").exists());
    assert!(outdir.join("curves.gp").exists());
    assert!(outdir.join("curves.dat").exists());
}

#[test]
fn stamp_for_other_kernel_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE_KERNEL, "exp_x", "");
    let outdir = dir.path().join("out");
    std::fs::create_dir_all(&outdir).unwrap();
    std::fs::write(outdir.join(".selftest_ok"), "0000beef\n").unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "curves",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn curves_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE_KERNEL, "abs_x_pow_1,exp_x", "");
    let mut contents: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for sub in ["out1", "out2"] {
        let outdir = dir.path().join(sub);
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            outdir.to_str().unwrap(),
            "--force",
            "curves",
        ]);
        assert_eq!(code(&out), 0);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&outdir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        contents.push(files);
    }
    assert_eq!(contents[0].len(), contents[1].len());
    for (a, b) in contents[0].iter().zip(&contents[1]) {
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1, "file {} differs between runs", a.0);
    }
}

#[test]
fn verify_skips_inadmissible_weight_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("kernel.conf"), REFERENCE_KERNEL).unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "kernel_spec = kernel.conf\np = 2\nalpha = 0.2\nfunctions = exp_x\nn_max = 8\n\
         [resolution]\nshift_nodes = 128\nnorm_nodes = 128\nsup_samples = 129\nfj_nodes = 384\n",
    )
    .unwrap();
    let outdir = dir.path().join("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "--force",
        "verify",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let summary = std::fs::read_to_string(outdir.join("verify_summary.csv")).unwrap();
    assert!(summary.contains("skipped"));
}

#[test]
fn verify_detects_wrong_y_family() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "sigma = one-minus-x-squared\nco_exponent = 2\n\
               idx_x_a = 2\nidx_x_b = 2\nidx_y_a = 1\nidx_y_b = 5\n";
    let cfg = write_config(dir.path(), bad, "exp_x", "");
    let outdir = dir.path().join("out");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        outdir.to_str().unwrap(),
        "--force",
        "verify",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("verify_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["multiplier"]["pass"], serde_json::Value::Bool(false));
}

#[test]
fn env_var_supplies_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE_KERNEL, "exp_x", "");
    let outdir = dir.path().join("out");
    let out = bin()
        .env("GSHIFT_CONFIG", cfg.to_str().unwrap())
        .args(["--output", outdir.to_str().unwrap(), "selftest"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(outdir.join("selftest_report.json").exists());
}
