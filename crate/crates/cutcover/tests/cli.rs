use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const K3: &str = "p ghct 3 3\ne 1 2 1\ne 2 3 1\ne 1 3 1\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutcover")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn cycle(n: usize) -> String {
    let mut s = format!("p ghct {n} {n}\n");
    for i in 0..n {
        s.push_str(&format!("e {} {} 1\n", i + 1, (i + 1) % n + 1));
    }
    s
}

#[test]
fn heldkarp_on_k3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.txt", K3);
    let v = json(&run(&["--mode", "heldkarp", "--eps", "0.05", &f]));
    let b = v["bound"].as_f64().unwrap();
    assert!((3.0..=3.15).contains(&b), "{b}");
    assert_eq!(v["verified"], Value::Bool(true));
    assert!(v["epochs"].as_u64().unwrap() > 0);
}

#[test]
fn output_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.txt", K3);
    let out = run(&["--eps", "0.2", &f]);
    let v = json(&out);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(!String::from_utf8(out.stdout).unwrap().contains("\n{"));
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c7.txt", &cycle(7));
    let strip = |o: Output| {
        let mut v = json(&o);
        v.as_object_mut().unwrap().remove("runtime_ms");
        serde_json::to_vec(&v).unwrap()
    };
    let a = strip(run(&["--eps", "0.1", "--seed", "9", &f]));
    let b = strip(run(&["--eps", "0.1", "--seed", "9", &f]));
    let c = strip(run(&["--eps", "0.1", "--seed", "9", "--threads", "3", &f]));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn disconnected_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "p ghct 4 2\ne 1 2 1\ne 3 4 1\n");
    let out = run(&[&f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let f = write(dir.path(), "bad.txt", "p ghct 2 1\ne 1 x 1\n");
    assert_eq!(run(&[&f]).status.code(), Some(2));
    let f = write(dir.path(), "k3.txt", K3);
    assert_eq!(run(&["--eps", "0.7", &f]).status.code(), Some(2));
}

#[test]
fn tiny_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.txt", K3);
    assert_eq!(run(&["--budget-iters", "5", &f]).status.code(), Some(3));
}

#[test]
fn kecss_examples() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.txt", K3);
    let v = json(&run(&["--mode", "kecss", "--k", "2", "--eps", "0.05", &f]));
    let b = v["bound"].as_f64().unwrap();
    assert!((3.0..=3.15).contains(&b), "{b}");
    let v = json(&run(&["--mode", "kecss", "--k", "1", "--eps", "0.05", &f]));
    let b = v["bound"].as_f64().unwrap();
    assert!((1.5..=1.575).contains(&b), "{b}");
    let bridge = write(dir.path(), "bridge.txt", "p ghct 4 4\ne 1 2 1\ne 2 3 1\ne 1 3 1\ne 3 4 1\n");
    let out = run(&["--mode", "kecss", "--k", "2", &bridge]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not 2-edge-connected"));
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k3.txt", K3);
    let ones = write(dir.path(), "ones.txt", "1 1 1\n");
    let v = json(&run(&["--mode", "verify", "--k", "2", "--verify", &ones, &f]));
    assert_eq!(v["feasible"], Value::Bool(true));
    assert_eq!(v["objective"].as_f64(), Some(3.0));
    assert_eq!(v["min_cut"].as_f64(), Some(2.0));

    let zeros = write(dir.path(), "zeros.txt", "0 0 0\n");
    let out = run(&["--mode", "verify", "--verify", &zeros, &f]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], Value::Bool(false));
    assert_eq!(v["min_cut"].as_f64(), Some(0.0));

    let over = write(dir.path(), "over.txt", "1.2 1 1\n");
    let out = run(&["--mode", "verify", "--strict", "--verify", &over, &f]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bound_violations"], serde_json::json!([1]));

    let short = write(dir.path(), "short.txt", "1 1\n");
    assert_eq!(run(&["--mode", "verify", "--verify", &short, &f]).status.code(), Some(2));

    // a solver result verifies as-is
    let sol = run(&["--eps", "0.1", &f]);
    let path = write(dir.path(), "sol.json", std::str::from_utf8(&sol.stdout).unwrap());
    let v = json(&run(&["--mode", "verify", "--verify", &path, &f]));
    assert_eq!(v["feasible"], Value::Bool(true));
}

#[test]
fn mincut_reports_a_side() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c6.txt", &cycle(6));
    let v = json(&run(&["--mode", "mincut", &f]));
    assert_eq!(v["min_cut"].as_f64(), Some(2.0));
    let side = v["side"].as_array().unwrap();
    assert!(!side.is_empty() && side.len() < 6);
}

#[test]
fn tsplib_input() {
    let dir = tempfile::tempdir().unwrap();
    let text = "NAME: sq\nTYPE: TSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 10 0\n3 10 10\n4 0 10\nEOF\n";
    let f = write(dir.path(), "sq.tsp", text);
    let v = json(&run(&["--tsplib", "--eps", "0.05", &f]));
    let b = v["bound"].as_f64().unwrap();
    assert!((40.0..=42.0).contains(&b), "{b}");
    assert_eq!(v["m"].as_u64(), Some(6));
}

#[test]
fn bench_suite_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    for n in 3..8 {
        write(dir.path(), &format!("c{n}.txt"), &cycle(n));
    }
    let d = dir.path().to_str().unwrap();
    let v = json(&run(&["--mode", "bench", "--eps", "0.2", d]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["invariants"] == "ok"));

    let c8 = tempfile::tempdir().unwrap();
    write(c8.path(), "c8.txt", &cycle(8));
    let out = run(&["--mode", "bench", "--eps", "0.3,0.1,0.05", "--format", "csv", c8.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let its: Vec<u64> = rdr.records().map(|r| r.unwrap()[6].parse().unwrap()).collect();
    assert_eq!(its.len(), 3);
    assert!(its.windows(2).all(|w| w[0] <= w[1]), "{its:?}");

    let empty = tempfile::tempdir().unwrap();
    let out = run(&["--mode", "bench", empty.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out), serde_json::json!([]));
}
