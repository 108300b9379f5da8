//! End-to-end checks of the `rfabel` binary: exit codes, output format,
//! config round-trips, checkpoint/resume behavior and the determinism
//! contract of the CSV bodies.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfabel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Data rows only: the `#` metadata lines (wall time etc.) are exempt from
/// the determinism contract.
fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("rfabel-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn csum_prints_both_methods() {
    let out = run(&["csum", "--q", "4", "--n", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("c_4(2) = -2"), "{text}");
    assert!(text.contains("agree: true"), "{text}");

    let out = run(&["csum", "--q", "4", "--n", "2", "--direct"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("method direct: -2"));

    // Negative arguments reduce by evenness: c_4(-2) = c_4(2).
    let out = run(&["csum", "--q", "4", "--n", "-2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("c_4(-2) = -2"), "{}", stdout(&out));
}

#[test]
fn sieve_emits_csv_rows() {
    let out = run(&["sieve", "--n-max", "12"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let body = csv_body(&text);
    assert!(body.starts_with("n,phi,mu,lambda"));
    assert!(body.contains("\n12,4,0,"), "{body}");
    assert!(text.lines().any(|l| l.starts_with("# tool: rfabel")));
}

#[test]
fn singular_prints_value_and_remainder() {
    let out = run(&["singular", "--h", "2", "--cutoff", "100000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("C(h=2) = 1.3203246"), "{text}");
    assert!(text.contains("remainder estimate"), "{text}");
}

#[test]
fn parameter_errors_exit_2() {
    // Missing required parameters.
    let out = run(&["correlate", "--f", "one", "--g", "one", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown family.
    let out = run(&["correlate", "--f", "what", "--g", "one", "--m", "1", "--N", "10"]);
    assert_eq!(out.status.code(), Some(2));
    // Damped family without z/eps.
    let out = run(&[
        "correlate",
        "--f",
        "damped:mu-over-phi",
        "--g",
        "one",
        "--m",
        "0",
        "--N",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // Singular series below the minimum cutoff.
    let out = run(&["singular", "--h", "2", "--cutoff", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // Odd shift rejected by the experiment.
    let out = run(&["experiment", "prime-pair", "--h", "1", "--N", "2000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_suspected_exits_3() {
    let out = run(&["abel-eval", "--z", "0.99999999", "--eps", "0.000000001", "--n", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn correlate_csv_is_deterministic_across_worker_counts() {
    let args = [
        "correlate", "--f", "cq:12", "--g", "cq:9", "--m", "1", "--N", "200000",
    ];
    let one = bin().args(args).env("RFABEL_WORKERS", "1").output().unwrap();
    let eight = bin().args(args).env("RFABEL_WORKERS", "8").output().unwrap();
    assert!(one.status.success() && eight.status.success());
    assert_eq!(csv_body(&stdout(&one)), csv_body(&stdout(&eight)));
}

#[test]
fn correlate_json_output() {
    let out = run(&[
        "correlate", "--f", "one", "--g", "one", "--m", "2", "--N", "100", "--out", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["value"], serde_json::json!(1.0));
    assert_eq!(doc["result"]["retained"], serde_json::json!(100));
}

#[test]
fn streaming_and_dense_weighted_lambda_agree() {
    let base = [
        "correlate",
        "--f",
        "weighted-lambda",
        "--g",
        "weighted-lambda",
        "--m",
        "2",
        "--N",
        "50000",
    ];
    let dense = run(&base);
    let mut streaming_args = base.to_vec();
    streaming_args.push("--streaming");
    let streaming = run(&streaming_args);
    assert!(dense.status.success() && streaming.status.success());
    assert_eq!(csv_body(&stdout(&dense)), csv_body(&stdout(&streaming)));
}

#[test]
fn config_file_reproduces_flag_run() {
    let cfg_path = temp_path("config.json");
    let config = serde_json::json!({
        "subcommand": "correlate",
        "f": "cq:6",
        "g": "cq:6",
        "m": 2,
        "sign": "+",
        "n_terms": 30000,
        "chunk_size": 4096,
    });
    fs::write(&cfg_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let by_flags = run(&[
        "correlate", "--f", "cq:6", "--g", "cq:6", "--m", "2", "--N", "30000",
        "--chunk-size", "4096",
    ]);
    let by_config = run(&["correlate", "--config", cfg_path.to_str().unwrap()]);
    assert!(by_flags.status.success() && by_config.status.success());
    assert_eq!(csv_body(&stdout(&by_flags)), csv_body(&stdout(&by_config)));

    // Config plus explicit params is ambiguous.
    let out = run(&[
        "correlate", "--config", cfg_path.to_str().unwrap(), "--m", "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_file(&cfg_path).ok();
}

#[test]
fn interrupt_then_resume_matches_uninterrupted() {
    let ckpt = temp_path("resume.json");
    let out_full = temp_path("full.csv");
    let out_resumed = temp_path("resumed.csv");
    fs::remove_file(&ckpt).ok();

    let base = |n: &str| {
        vec![
            "correlate".to_string(),
            "--f".into(),
            "cq:15".into(),
            "--g".into(),
            "cq:10".into(),
            "--m".into(),
            "3".into(),
            "--N".into(),
            n.to_string(),
            "--chunk-size".into(),
            "1000".into(),
        ]
    };

    // Uninterrupted reference.
    let mut args = base("47000");
    args.extend(["--output".into(), out_full.to_str().unwrap().into()]);
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success());

    // Interrupted: stop after 13 of 47 chunks.
    let mut args = base("47000");
    args.extend([
        "--checkpoint".into(),
        ckpt.to_str().unwrap().into(),
        "--checkpoint-interval".into(),
        "4".into(),
        "--stop-after-chunks".into(),
        "13".into(),
    ]);
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ckpt.exists());
    assert!(stdout(&out).contains("suspended after 13"));

    // Resume to completion.
    let mut args = base("47000");
    args.extend([
        "--checkpoint".into(),
        ckpt.to_str().unwrap().into(),
        "--output".into(),
        out_resumed.to_str().unwrap().into(),
    ]);
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!ckpt.exists(), "checkpoint should be cleaned up on completion");

    let full = fs::read_to_string(&out_full).unwrap();
    let resumed = fs::read_to_string(&out_resumed).unwrap();
    assert_eq!(csv_body(&full), csv_body(&resumed));

    fs::remove_file(&out_full).ok();
    fs::remove_file(&out_resumed).ok();
}

#[test]
fn resume_with_altered_params_exits_4_and_writes_nothing() {
    let ckpt = temp_path("mismatch.json");
    let out_path = temp_path("mismatch-output.csv");
    fs::remove_file(&ckpt).ok();
    fs::remove_file(&out_path).ok();

    let out = run(&[
        "correlate", "--f", "cq:5", "--g", "cq:5", "--m", "0", "--N", "40000",
        "--chunk-size", "1000",
        "--checkpoint", ckpt.to_str().unwrap(),
        "--stop-after-chunks", "10",
    ]);
    assert!(out.status.success());

    // Altered N: the checkpoint no longer belongs to this run.
    let out = bin()
        .args([
            "correlate", "--f", "cq:5", "--g", "cq:5", "--m", "0", "--N", "50000",
            "--chunk-size", "1000",
            "--checkpoint", ckpt.to_str().unwrap(),
            "--output", out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(!out_path.exists(), "no output may be written on mismatch");

    fs::remove_file(&ckpt).ok();
}

#[test]
fn verify_suite_passes() {
    let out = run(&["verify"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("PASS csum-orthogonality"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}
