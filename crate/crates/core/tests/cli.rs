use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superp2")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn grass_cells_counts_big_cells() {
    let v = json(&["grass", "cells", "1", "1", "2", "2"]);
    assert_eq!(v["results"]["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn grass_picard() {
    let v = json(&["grass", "picard", "1", "0"]);
    assert_eq!(v["results"]["coefficient"], "1");
    let v = json(&["grass", "picard", "-2", "3"]);
    assert_eq!(v["results"]["coefficient"], "1");
}

#[test]
fn grass_atlas_check_passes() {
    let o = run(&["grass", "atlas-check", "1", "1", "2", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS cocycle"));
}

#[test]
fn cohom_twisted_tangent() {
    let o = run(&["cohom", "T(-3) on P2", "--q", "1"]);
    assert_eq!(stdout(&o).trim(), "h^1 = 1|0");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["cohom", "T(-3) on P7"]).status.code(), Some(2));
    assert_eq!(run(&["--lambda", "abc", "p2", "build"]).status.code(), Some(2));
    assert_eq!(run(&["p2", "sections", "--verify", "--solve"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn cap_exits_3() {
    assert_eq!(run(&["grass", "cells", "2", "2", "12", "12"]).status.code(), Some(3));
}

#[test]
fn p2_build_at_rational_lambda() {
    let v = json(&["--lambda", "-3/2", "p2", "build"]);
    assert_eq!(v["inputs"]["lambda"], "-3/2");
    assert_eq!(v["ok"], true);
    assert_eq!(v["results"]["omega_zero"], false);
    let v = json(&["--lambda", "0", "p2", "build"]);
    assert_eq!(v["results"]["omega_zero"], true);
}

#[test]
fn p2_sections_solve_and_split_case() {
    let v = json(&["p2", "sections", "--solve"]);
    assert_eq!(v["results"]["same_span_as_canonical"], true);
    let v = json(&["--lambda", "0", "p2", "sections", "--solve"]);
    assert_eq!(v["results"]["basis"]["even"].as_array().unwrap().len(), 13);
}

#[test]
fn embed_check_rank() {
    let v = json(&["embed", "--check-rank"]);
    assert_eq!(v["ok"], true);
    assert_eq!(v["results"]["certificates"].as_array().unwrap().len(), 3);
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("superp2-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let o = run(&["grass", "picard", "0", "1", "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_fixture_override_detects_a_flip() {
    let dir = std::env::temp_dir().join(format!("superp2-fx-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = include_str!("../fixtures/jacobian_u1_u0.json");
    let mut v: serde_json::Value = serde_json::from_str(src).unwrap();
    let rows = v["rows"].as_array_mut().unwrap();
    let e = rows[0][0].as_str().unwrap().to_string();
    rows[0][0] = serde_json::Value::String(format!("-({e})"));
    std::fs::write(dir.join("jacobian_u1_u0.json"), v.to_string()).unwrap();
    let o = run(&["selftest", "--fixtures", dir.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  5"));
}
