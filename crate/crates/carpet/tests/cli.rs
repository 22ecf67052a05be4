use std::path::Path;
use std::process::{Command, Output};

use loewner_carpet::io::RunManifest;

fn carpet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(args.iter().map(|a| a.replace("{out}", dir.to_str().unwrap())))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_verify_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let built = carpet(&["build", "--rules", "basic", "--levels", "1", "--out", "{out}"], out);
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));
    let m = RunManifest::read(out).unwrap();
    assert_eq!(m.levels, 1);
    assert!(m.files.contains_key("level_1.ledger.json"));

    let v = carpet(&["verify", "--out", "{out}", "--checks", "axioms,wormhole,corridor,planarity"], out);
    assert_eq!(v.status.code(), Some(0));
    let report = stdout(&v);
    assert!(report.starts_with("check,target,measured,verdict"));
    assert!(report.lines().skip(1).all(|l| l.ends_with(",pass")), "{report}");

    let svg = out.join("level1.svg");
    let r = carpet(&["render", "--out", "{out}", "--level", "1", "--svg", svg.to_str().unwrap()], out);
    assert!(r.status.success());
    assert!(std::fs::read_to_string(svg).unwrap().contains("<svg"));

    let i = carpet(&["invariant", "--profile", out.join("profile.csv").to_str().unwrap(), "--t", "1,1/2"], out);
    assert!(i.status.success());
    assert_eq!(stdout(&i).lines().nth(1), Some("1,1"));
}

#[test]
fn dims_prints_a_plan() {
    let dir = tempfile::tempdir().unwrap();
    let o = carpet(&["dims", "--Q", "1.2", "--Qp", "1.5", "--levels", "8"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], serde_json::json!([16, 6, 2]));
    assert_eq!(v["plan"]["symbols"].as_array().unwrap().len(), 8);
}

#[test]
fn bad_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let swapped = carpet(&["dims", "--Q", "1.5", "--Qp", "1.2"], dir.path());
    assert_eq!(swapped.status.code(), Some(2));
    let small = carpet(&["build", "--rules", "S8", "--levels", "1", "--out", "{out}"], dir.path());
    assert_eq!(small.status.code(), Some(2));
    let usage = carpet(&["verify"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn tampered_run_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(carpet(&["build", "--rules", "S16", "--levels", "1", "--out", "{out}"], out).status.success());
    let path = out.join("level_1.graph.json");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"level\":1", "\"level\":1 ", 1)).unwrap();
    let v = carpet(&["verify", "--out", "{out}", "--checks", "axioms"], out);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("level_1.graph.json"));
}
