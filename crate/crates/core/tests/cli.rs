mod common;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Output};

use common::{lottery, AMBIGUITY};

fn plaus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plaus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_file(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_reports_sizes_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let out = plaus(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rule instances: 7 (strict 3, defeasible 4, warning 0)"), "{text}");
    assert!(text.trim_end().ends_with("ok"));
}

#[test]
fn prove_prints_the_value_and_exits_by_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let path = file.to_str().unwrap();

    let out = plaus(&["prove", path, "--alg", "beta", "--query", "e"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "+1\n");

    let out = plaus(&["prove", path, "--alg", "pi", "--query", "e"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "-1\n");

    let out = plaus(&["prove", path, "--alg", "theta_prime", "--query", "e"]);
    assert_eq!(out.status.code(), Some(0), "alias for thetap: {}", stderr(&out));
}

#[test]
fn truth_prints_one_letter() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let path = file.to_str().unwrap();
    let out = plaus(&["truth", path, "--alg", "beta", "--query", "d"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "u\n");
    let out = plaus(&["truth", path, "--alg", "beta", "--query", "e"]);
    assert_eq!(stdout(&out), "t\n");
}

#[test]
fn unknown_algorithms_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let out = plaus(&["prove", file.to_str().unwrap(), "--alg", "gamma", "--query", "e"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unparsable_files_exit_with_the_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", "axiom p |.\n");
    let out = plaus(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn non_ground_queries_exit_with_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", "const nancy.\ndef r1: => p(nancy).\n");
    let out = plaus(&["prove", file.to_str().unwrap(), "--alg", "beta", "--query", "p(X)"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn semantic_description_errors_exit_with_the_description_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", "axiom p.\naxiom ~p.\n");
    let out = plaus(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("unsatisfiable"), "{}", stderr(&out));
}

#[test]
fn rad_certificates_validate_and_survive_tampering_checks() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let path = file.to_str().unwrap();
    let cert_path = dir.path().join("e.cert.json");
    let cert_str = cert_path.to_str().unwrap();

    let out = plaus(&[
        "rad", path, "--alg", "beta", "--query", "e", "--out", cert_str,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = plaus(&["validate", path, "--cert", cert_str]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("certificate valid"));

    let tampered = std::fs::read_to_string(&cert_path)
        .unwrap()
        .replacen("\"value\": 1", "\"value\": -1", 1);
    let bad_path = write_file(&dir, "bad.cert.json", &tampered);
    let out = plaus(&["validate", path, "--cert", bad_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
}

#[test]
fn rad_prints_dot_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", AMBIGUITY);
    let out = plaus(&[
        "rad",
        file.to_str().unwrap(),
        "--alg",
        "beta",
        "--query",
        "e",
        "--format",
        "dot",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("digraph"));
}

#[test]
fn audit_summarises_engine_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(&dir, "d.pl", &lottery(3, &[]));
    let out = plaus(&["audit", file.to_str().unwrap(), "--universe", "literals"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("coherence"));
    assert!(text.contains("2-consistency"));
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("PASS"));
}
