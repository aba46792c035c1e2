use std::io::Write;
use std::process::{Command, Output, Stdio};

fn normone(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_normone"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_json_round_trips_through_verify() {
    for (p, n, strategy) in [
        ("2", "2", "unit"),
        ("3", "2", "unit"),
        ("5", "2", "unit"),
        ("2", "3", "unit"),
        ("2", "3", "doubling"),
        ("2", "4", "doubling"),
        ("2", "4", "unit"),
    ] {
        let gen = normone(&["generate", "--p", p, "--n", n, "--strategy", strategy, "--format", "json"], "");
        assert_eq!(gen.status.code(), Some(0), "{p} {n} {strategy}");
        let check = normone(&["verify", "--input", "-"], &stdout(&gen));
        assert_eq!(check.status.code(), Some(0), "{p} {n} {strategy}: {}", stdout(&check));
        assert!(stdout(&check).starts_with("PASS"));
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["generate", "--p", "3", "--n", "2", "--format", "latex"][..],
        &["generate", "--p", "2", "--n", "3", "--format", "json", "--steps"][..],
        &["count", "--p", "2", "--n", "3", "--strategy", "unit", "--json"][..],
        &["evaluate", "--p", "2", "--n", "2", "--seeds", "4", "--kind", "matrix", "--dim", "3"][..],
    ] {
        let a = normone(args, "");
        let b = normone(args, "");
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn short_p2_formula_verifies() {
    let doc = r#"{"p":2,"n":2,"terms":[
        {"c":"1","w":[0,1,0]},{"c":"1","w":[0,1]},{"c":"-1","w":[0,0,1]}]}"#;
    let out = normone(&["verify", "--input", "-", "--m", "2"], doc);
    assert_eq!(out.status.code(), Some(0));
    let bad = r#"{"p":2,"n":2,"terms":[{"c":"1","w":[0]}]}"#;
    let out = normone(&["verify", "--input", "-"], bad);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("FAIL: N - 1 reduces to"));
}

#[test]
fn exit_codes_and_messages() {
    let out = normone(&["generate", "--p", "9", "--n", "1"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("9 is not a prime"));

    let out = normone(&["generate", "--p", "2", "--n", "20"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));

    let out = normone(&["verify", "--input", "-"], "{\"p\": 2,");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1 column"));

    let out = normone(&["frobnicate"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("normone-cli-{}.json", std::process::id()));
    let out = normone(&["generate", "--p", "2", "--n", "2", "--format", "json", "-o", path.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with(r#"{"p":2,"n":2,"terms":"#));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn cohomology_with_user_matrices() {
    let doc = r#"{"actions":[{"name":"sign","order":2,"matrix":[[-1]]},{"name":"swap","order":2,"matrix":[[0,1],[1,0]]}]}"#;
    let out = normone(&["cohomology", "--p", "2", "--n", "1", "--input", "-"], doc);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("sign: H1 = Z/2, H2 = 0"), "{text}");
    assert!(text.contains("swap: H1 = 0, H2 = 0"), "{text}");
}

#[test]
fn replay_and_count_report() {
    let out = normone(&["replay", "--p", "2", "--n", "4", "--step", "2"], "");
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("step 2 (m=4, k=2):"));
    let out = normone(&["count", "--p", "2", "--n", "2"], "");
    assert!(stdout(&out).contains("a has 5 monomials (expanded over x: 5, reduced: 5) <= bound 7"), "{}", stdout(&out));
}
