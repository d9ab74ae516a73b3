use std::path::Path;
use std::process::{Command, Output};

fn weightlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightlab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(csv: &str, row: usize, col: usize) -> String {
    csv.lines().nth(row).unwrap().split(',').nth(col).unwrap().to_string()
}

#[test]
fn solve_big_match_cesaro() {
    let csv = stdout(&weightlab(&["solve", "--game", "builtin:big_match", "--weights", "cesaro:n=50"]));
    assert_eq!(csv.lines().next().unwrap(), "state,v_pi,v_n");
    let v: f64 = field(&csv, 1, 1).parse().unwrap();
    assert!((v - 0.5).abs() < 1e-9);
    assert_eq!(field(&csv, 1, 2), "0.5");
}

#[test]
fn solve_oscillator_parity() {
    let csv = stdout(&weightlab(&[
        "solve", "--game", "builtin:oscillator", "--weights", "parity:half=10,side=odd", "--start", "s1",
    ]));
    assert_eq!(field(&csv, 1, 0), "s1");
    assert_eq!(field(&csv, 1, 1), "1.0");
}

#[test]
fn solve_discounted_reports_both_values() {
    let csv = stdout(&weightlab(&[
        "solve", "--game", "builtin:big_match", "--weights", "discounted:lambda=0.1,eps=1e-12",
    ]));
    assert_eq!(csv.lines().next().unwrap(), "state,v_pi,v_lambda");
    for col in [1, 2] {
        let v: f64 = field(&csv, 1, col).parse().unwrap();
        assert!((v - 0.5).abs() < 1e-9);
    }
}

#[test]
fn invalid_game_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"states":["a"],"actions1":[1],"actions2":[1],"payoff":[[["2.0"]]],"transition":[[[["0.5"]]]]}"#,
    )
    .unwrap();
    let out = weightlab(&["solve", "--game", bad.to_str().unwrap(), "--weights", "cesaro:n=3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("payoff") && err.contains("sum"), "{err}");
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        vec!["solve", "--game", "builtin:nope", "--weights", "cesaro:n=3"],
        vec!["solve", "--game", "builtin:big_match", "--weights", "cesaro:n=0"],
        vec!["impatience", "--weights", "cesaro:n=3", "--p", "-1"],
        vec!["order", "--game", "builtin:counterexample", "--grid", "1e-2:1e-5", "--state", "ω1"],
        vec!["counterexample"],
    ] {
        assert_eq!(weightlab(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn counterexample_budget_exits_3() {
    let out = weightlab(&["counterexample", "--n", "2,7", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("5750395 stages"));
}

#[test]
fn impatience_of_blocks() {
    let csv = stdout(&weightlab(&["impatience", "--weights", "zblocks:n=3", "--p", "1"]));
    let v: f64 = field(&csv, 1, 1).parse().unwrap();
    assert!((v - 53.0 / 81.0).abs() < 1e-12);
}

#[test]
fn order_of_vigeral_prime() {
    let csv = stdout(&weightlab(&["order", "--game", "builtin:vigeral_prime", "--grid", "1e-2:1e-5:5", "--state", "ω1"]));
    let s: f64 = field(&csv, 1, 0).parse().unwrap();
    assert!((s - 0.5).abs() < 0.1, "{s}");
}

#[test]
fn order_of_big_match_is_indistinguishable() {
    let out = weightlab(&["order", "--game", "builtin:big_match", "--grid", "1e-2:1e-4:5", "--state", "ω"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("indistinguishable"));
}

#[test]
fn gen_random_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let a = stdout(&weightlab(&["gen-random", "--states", "3", "--actions", "2", "--seed", "7"]));
    let b = stdout(&weightlab(&["gen-random", "--states", "3", "--actions", "2", "--seed", "7", "--out", path.to_str().unwrap()]));
    assert!(b.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    let csv = stdout(&weightlab(&["solve", "--game", path.to_str().unwrap(), "--weights", "cesaro:n=4"]));
    assert_eq!(csv.lines().count(), 1 + 3 + 3);
}

#[test]
fn json_reports_replay_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let r = report.to_str().unwrap();
    stdout(&weightlab(&["bigmatch", "--q", "0.05", "--l", "0,10", "--n", "10", "--format", "json", "--out", r]));
    let text = std::fs::read_to_string(&report).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["config"]["command"], "bigmatch");
    assert_eq!(json["windows"].as_array().unwrap().len(), 2);
    assert_eq!(stdout(&weightlab(&["replay", r])), text);
}

#[test]
fn trace_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    stdout(&weightlab(&[
        "solve", "--game", "builtin:counterexample", "--weights", "zblocks:n=2", "--trace", trace.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(Path::new(&trace)).unwrap();
    assert!(text.starts_with("r,Pi_r,lambda_r,v_state_0,v_state_1,v_state_2,v_state_3\n"));
    assert_eq!(text.lines().count(), 1 + 241);
}
