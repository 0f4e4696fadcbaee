//! End-to-end checks of the binary: exit codes, output determinism and
//! the documented JSON/CSV shapes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperlie"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hyperlie-cli-test-{}-{name}", std::process::id()))
}

/// Pull the value after `"key": ` out of rendered JSON (flat scan).
fn json_field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let tag = format!("\"{key}\": ");
    let start = text.find(&tag)? + tag.len();
    let rest = &text[start..];
    let end = rest.find([',', '\n', '}']).unwrap_or(rest.len());
    Some(rest[..end].trim())
}

#[test]
fn verify_suite_passes_and_is_deterministic() {
    let args = [
        "verify",
        "--suite",
        "jacobi",
        "--samples",
        "25",
        "--seed",
        "42",
    ];
    let a = run(&args);
    assert!(
        a.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&a.stderr)
    );
    let text = stdout(&a);
    assert_eq!(json_field(&text, "pass"), Some("true"));
    assert!(text.contains("\"suite\": \"jacobi\""));
    assert!(text.contains("\"tolerance_ladder\""));
    let b = run(&args);
    assert_eq!(
        a.stdout, b.stdout,
        "same seed and config must be byte-identical"
    );
    let c = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--samples",
        "25",
        "--seed",
        "7",
    ]);
    assert_ne!(a.stdout, c.stdout, "different seeds should differ");
}

#[test]
fn verify_all_with_region_passes() {
    let out = run(&[
        "verify",
        "--suite",
        "all",
        "--samples",
        "10",
        "--region",
        "both",
    ]);
    assert!(out.status.success());
    assert_eq!(json_field(&stdout(&out), "pass"), Some("true"));
}

#[test]
fn verify_usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--region", "sideways"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn verify_failing_tolerance_exits_1() {
    let out = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--samples",
        "10",
        "--tol",
        "jacobi_single_frame=1e-300",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert_eq!(json_field(&text, "pass"), Some("false"));
    // failing checks report the worst point's coordinates
    assert!(text.contains("\"worst_failing_point\": ["));
}

#[test]
fn config_file_is_applied_and_flags_override() {
    let path = tmp_path("config");
    std::fs::write(&path, "# test config\nseed=7\nsamples=25\n").unwrap();
    let from_file = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--config",
        path.to_str().unwrap(),
    ]);
    let from_flags = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--seed",
        "7",
        "--samples",
        "25",
    ]);
    assert_eq!(from_file.stdout, from_flags.stdout);
    // flag wins over file
    let overridden = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    let plain = run(&[
        "verify",
        "--suite",
        "jacobi",
        "--seed",
        "42",
        "--samples",
        "25",
    ]);
    assert_eq!(overridden.stdout, plain.stdout);
    std::fs::remove_file(&path).ok();
}

#[test]
fn flow_scaling_start_converges_to_origin() {
    let csv = tmp_path("s0.csv");
    let out = run(&[
        "flow",
        "--init",
        "1,0,0;0,1,0;0,0,1",
        "--t0",
        "0",
        "--t1",
        "-10",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(json_field(&text, "verdict"), Some("\"converges_to\""));
    let r: f64 = json_field(&text, "r").unwrap().parse().unwrap();
    assert!(r.abs() < 1e-3, "r = {r}");

    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("# hyperlie-traj v1"));
    assert_eq!(
        lines.next(),
        Some("t,a1,a2,a3,b1,b2,b3,c1,c2,c3,phi,F,cas1,cas2,cas3,cas4,cas5,normX")
    );
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), 18);
        rows += 1;
    }
    assert!(rows > 5);
    std::fs::remove_file(&csv).ok();
}

#[test]
fn flow_orbit_start_reports_radius_one() {
    let csv = tmp_path("orbit.csv");
    let out = run(&[
        "flow",
        "--init",
        "1.41421356,0,0;0,1,0;0,0,1",
        "--t0",
        "0",
        "--t1",
        "-5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(json_field(&text, "verdict"), Some("\"converges_to\""));
    let r: f64 = json_field(&text, "r").unwrap().parse().unwrap();
    assert!((r - 1.0).abs() < 1e-3, "r = {r}");
    std::fs::remove_file(&csv).ok();
}

#[test]
fn flow_negative_start_does_not_converge() {
    let csv = tmp_path("neg.csv");
    let out = run(&[
        "flow",
        "--init",
        "1,0,0;0,0,1;0,1,0",
        "--t0",
        "0",
        "--t1",
        "-0.5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let verdict = json_field(&text, "verdict").unwrap();
    assert!(
        verdict == "\"diverges\"" || verdict == "\"leaves_positivity\"",
        "verdict {verdict}"
    );
    std::fs::remove_file(&csv).ok();
}

#[test]
fn flow_usage_errors_exit_2() {
    assert_eq!(
        run(&["flow", "--t0", "0", "--t1", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "flow",
            "--init",
            "1,0,0;0,1,0",
            "--t0",
            "0",
            "--t1",
            "-1",
            "--out",
            "/tmp/x.csv"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "flow",
            "--init",
            "1,0,0;0,1,0;0,0,x",
            "--t0",
            "0",
            "--t1",
            "-1",
            "--out",
            "/tmp/x.csv"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn classify_reference_points() {
    let out = run(&["classify", "--init", "1,0,0;0,1,0;0,0,1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(json_field(&text, "s_membership"), Some("\"S_0\""));
    let lambda: f64 = json_field(&text, "lambda").unwrap().parse().unwrap();
    assert!((lambda - 1.0).abs() < 1e-9);

    let out = run(&["classify", "--init", "3,0,0;0,0,0;0,0,0"]);
    let text = stdout(&out);
    assert_eq!(json_field(&text, "s_membership"), Some("\"S_O\""));
    let r: f64 = json_field(&text, "r").unwrap().parse().unwrap();
    assert!((r - 3.0).abs() < 1e-9);

    let out = run(&["classify", "--init", "1,0,0;0,0,1;0,1,0"]);
    let text = stdout(&out);
    assert_eq!(json_field(&text, "s_membership"), Some("\"not_in_S\""));
    assert_eq!(json_field(&text, "r"), Some("null"));
}

#[test]
fn project_reference_points() {
    let out = run(&["project", "--init", "1,0,0;0,1,0;0,0,1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(json_field(&text, "kind"), Some("\"nilpotent\""));
    assert_eq!(json_field(&text, "projection_rank"), Some("4"));
    let kks: f64 = json_field(&text, "kks_residual").unwrap().parse().unwrap();
    assert!(kks < 1e-6);

    let out = run(&["project", "--init", "1.41421356237309515,0,0;0,1,0;0,0,1"]);
    let text = stdout(&out);
    assert_eq!(json_field(&text, "kind"), Some("\"regular_semisimple\""));
    let re: f64 = json_field(&text, "re").unwrap().parse().unwrap();
    assert!((re - 1.0).abs() < 1e-7);

    let out = run(&["project", "--init", "0,0,0;0,0,0;0,0,0"]);
    let text = stdout(&out);
    assert_eq!(json_field(&text, "kind"), Some("\"zero\""));
    assert_eq!(json_field(&text, "projection_rank"), Some("null"));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("USAGE"));
}
