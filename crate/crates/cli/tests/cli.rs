use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn kzp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kzp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

#[test]
fn delta3_measure() {
    let o = kzp(&["measure", &data("delta3.json"), "-p", "2", "--at"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "1/7\n");
}

#[test]
fn divisibility_equality() {
    let o = kzp(&["eq", &data("p_times_pzp.json"), &data("one.json"), "-p", "2"]);
    assert_eq!((code(&o), stdout(&o)), (0, "Equal\n".to_string()));
    let o = kzp(&["eq", &data("delta3.json"), &data("one.json"), "-p", "2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "NotEqual: 1/7 vs 1\n");
}

#[test]
fn prime_is_validated() {
    let o = kzp(&["measure", &data("one.json"), "-p", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("p must be prime"), "{}", stderr(&o));
    let o = kzp(&["measure", &data("prime4.json"), "-p", "2"]);
    assert_eq!(code(&o), 2);
    let o = kzp(&["measure", &data("delta3.json"), "-p", "3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("differs"));
    let o = kzp(&["measure", &data("delta3.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&kzp(&["frobnicate"])), 2);
    assert_eq!(code(&kzp(&["measure", "/nonexistent.json", "-p", "2"])), 2);
    assert_eq!(code(&kzp(&["measure", &data("tail.json"), "-p", "3", "--at", "t=1"])), 2);
    assert_eq!(code(&kzp(&["qe"])), 2);
}

#[test]
fn symbolic_and_numeric_measure() {
    let o = kzp(&["measure", &data("tail.json"), "-p", "3"]);
    assert_eq!(stdout(&o), "sum[ s >= 0 ; 3/2 ; p^(-s) ]\n");
    let o = kzp(&["measure", &data("tail.json"), "-p", "3", "--at", "s=2"]);
    assert_eq!(stdout(&o), "1/6\n");
}

#[test]
fn divergence_exit_code() {
    let o = kzp(&["measure", &data("diverges.json"), "-p", "2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("generator 0"), "{}", stderr(&o));
    let o = kzp(&["count", "--formula", "0 <= l", "--vars", "l", "-p", "2"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn normalize_round_trip() {
    let doc = scratch("basic.json");
    let cert = scratch("cert.json");
    let o = kzp(&[
        "normalize",
        &data("tail.json"),
        "-p",
        "3",
        "-o",
        doc.to_str().unwrap(),
        "--cert",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ell = stdout(&o).trim().strip_prefix("ell = ").unwrap().to_string();
    let o = kzp(&["eq", &data("tail.json"), doc.to_str().unwrap(), "-p", "3", "--scale", &ell]);
    assert_eq!((code(&o), stdout(&o)), (0, "Equal\n".to_string()));
    let o = kzp(&["certify", cert.to_str().unwrap(), "-p", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("valid"));
}

#[test]
fn tampered_certificate() {
    let cert = scratch("bad.json");
    kzp(&["normalize", &data("tail.json"), "-p", "3", "--cert", cert.to_str().unwrap()]);
    let text = std::fs::read_to_string(&cert).unwrap().replacen("\"coeff\": \"2\"", "\"coeff\": \"7\"", 1);
    std::fs::write(&cert, text).unwrap();
    let o = kzp(&["certify", cert.to_str().unwrap(), "-p", "3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("invalid: step"), "{}", stdout(&o));
}

#[test]
fn oracle_bracket() {
    let o = kzp(&["oracle", &data("tail.json"), "-p", "3", "--at", "s=2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.ends_with(", 1/6]"), "{first}");
    let o = kzp(&["oracle", &data("one.json"), "-p", "2", "--depth", "3", "--window", "2"]);
    assert_eq!(stdout(&o), "[1, 1]\nwidth 0\n");
}

#[test]
fn qe_and_count() {
    let o = kzp(&["qe", "--formula", "E x. a = 2*x /\\ x >= 0"]);
    assert_eq!(stdout(&o), "a >= 0 /\\ 2 | a\n");
    let f = scratch("f.txt");
    std::fs::write(&f, "0 <= l /\\ l <= s").unwrap();
    let args = ["count", f.to_str().unwrap(), "--vars", "l", "--params", "s", "--domain", "s >= 0", "-p", "2"];
    assert_eq!(stdout(&kzp(&args)), "s + 1  if  s >= 0\n");
    let mut at = args.to_vec();
    at.extend(["--at", "s=5"]);
    assert_eq!(stdout(&kzp(&at)), "6\n");
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_kzp"))
        .args(["measure", "-", "-p", "2"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let doc = std::fs::read_to_string(data("delta3.json")).unwrap();
    child.stdin.take().unwrap().write_all(doc.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "1/7\n");
}

#[test]
fn output_is_stable() {
    let a = kzp(&["normalize", &data("tail.json"), "-p", "3"]);
    let b = kzp(&["normalize", &data("tail.json"), "-p", "3"]);
    assert_eq!(a.stdout, b.stdout);
}
