use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use skewaffine::{Algebra, MapExpr};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewaffine"))
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn run(args: &[&str], input: &Path) -> Output {
    bin().args(args).arg("-i").arg(input).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn records(text: &[u8]) -> Vec<Value> {
    std::str::from_utf8(text)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn classify_ratio_i_line_is_purely_left() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "l.json", &json!({ "side": "left", "basis": [["1", "i"]] }));
    let out = run(&["subspace", "classify"], &f);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["sidedness"], "purely_left");
}

#[test]
fn dim_of_three_row_example_is_two() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "m.json",
        &json!({ "rows": [["1", "i", "j"], ["i", "-1", "k"], ["1", "0", "k"]] }),
    );
    let out = run(&["subspace", "dim"], &f);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["complement"], json!([2]));
}

#[test]
fn connect_parallel_planes_writes_three_planes() {
    let dir = TempDir::new().unwrap();
    let plane = |z: &str| json!({ "side": "left", "basis": [["1", "0", "0"], ["0", "1", "0"]], "point": ["0", "0", z] });
    let f = write(&dir, "p.json", &json!({ "first": plane("0"), "second": plane("5") }));
    let out_file = dir.path().join("chain.json");
    let out = bin()
        .args(["subspace", "connect", "-i"])
        .arg(&f)
        .arg("-o")
        .arg(&out_file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_file).unwrap()).unwrap();
    assert_eq!(v["length"], 3);
    assert_eq!(v["planes"].as_array().unwrap().len(), 3);
}

#[test]
fn mixed_intersection_is_reported_without_a_side() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "x.json",
        &json!({
            "first": { "side": "left", "basis": [["1", "i"]] },
            "second": { "side": "right", "basis": [["1", "i"]] }
        }),
    );
    let out = run(&["subspace", "intersect"], &f);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["sidedness"], "neither");
    assert_eq!(v["rational_dim"], 2);
}

#[test]
fn decompose_right_scalar_recovers_it() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "rs.json", &json!({ "n": 3, "map": { "op": "right_scalar", "a": "i" } }));
    let out = run(&["map", "decompose"], &f);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["mode"], "same_side");
    assert_eq!(v["form"]["a"], json!(["0", "1", "0", "0"]));
    assert_eq!(v["form"]["sigma"]["q"], json!(["1", "0", "0", "0"]));
    assert_eq!(v["form"]["anti"], Value::Null);
}

#[test]
fn verify_conjugation_passes_and_notes_side_swap() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.json", &json!({ "n": 2, "map": { "op": "antiauto", "q": "1" } }));
    let out = bin()
        .args(["map", "verify", "--trials", "100", "--seed", "7", "-i"])
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out.stdout);
    assert!(recs.iter().any(|r| r["mode"] == "side_swap"));
    assert_eq!(recs.last().unwrap()["summary"]["failed"], 0);
}

#[test]
fn shear_is_not_a_collineation() {
    let dir = TempDir::new().unwrap();
    let shear = MapExpr::shear(&Algebra::hamilton(), 2).unwrap();
    let f = write(&dir, "s.json", &json!({ "n": 2, "map": shear }));
    let out = run(&["map", "classify"], &f);
    assert_eq!(out.status.code(), Some(1));
    let rec = &records(&out.stdout)[0];
    assert_eq!(rec["status"], "fail");
    assert_eq!(rec["witness"]["kind"], "not_a_line");

    let w = write(&dir, "w.json", &json!({ "witness": rec["witness"] }));
    assert_eq!(bin().arg("recheck").arg("-i").arg(&w).status().unwrap().code(), Some(1));

    let out = run(&["map", "decompose"], &f);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage"));
}

#[test]
fn suite_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let go = |name: &str| {
        let p = dir.path().join(name);
        let s = bin()
            .args(["suite", "lemmas", "--seed", "5", "--trials", "5", "--dim", "3", "-o"])
            .arg(&p)
            .status()
            .unwrap();
        assert_eq!(s.code(), Some(0));
        std::fs::read(p).unwrap()
    };
    let (a, b) = (go("a.jsonl"), go("b.jsonl"));
    assert_eq!(a, b);
    let recs = records(&a);
    assert!(recs[..recs.len() - 1].iter().all(|r| r["status"] == "pass"));
}

#[test]
fn suite_runs_over_another_algebra() {
    let dir = TempDir::new().unwrap();
    let alg = write(&dir, "alg.json", &json!({ "a": "-2", "b": "-5" }));
    let out = bin()
        .args(["suite", "theorem", "--seed", "2", "--trials", "4", "--algebra"])
        .arg(&alg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let recs = records(&out.stdout);
    assert_eq!(recs.last().unwrap()["summary"]["config"]["algebra"]["b"], "-5");
}

#[test]
fn mutation_witnesses_recheck() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("m.jsonl");
    let s = bin()
        .args(["suite", "lemmas", "--trials", "5", "--mutation", "-o"])
        .arg(&report)
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(1));
    let recs = records(&std::fs::read(&report).unwrap());
    let failing: Vec<&Value> = recs.iter().filter(|r| r["status"] == "fail").collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|r| r["witness"].is_object()));

    let out = bin().arg("recheck").arg("-i").arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(records(&out.stdout).iter().all(|r| r["status"] == "confirmed"));
}

#[test]
fn malformed_input_exits_two_with_position() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"side\": \"left\",\n  \"basis\": [[\"1\", \"i\"]\n}").unwrap();
    let out = run(&["subspace", "classify"], &p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let f = write(&dir, "q.json", &json!({ "side": "left", "basis": [["1", "q"]] }));
    assert_eq!(run(&["subspace", "classify"], &f).status.code(), Some(2));

    let f = write(&dir, "n.json", &json!({ "map": { "op": "right_scalar", "a": "i" } }));
    assert_eq!(run(&["map", "decompose"], &f).status.code(), Some(2));
}
