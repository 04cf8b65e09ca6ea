use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const COIN_FLIP: &str = "\
# one flip, then stop
states s0 goal not-goal
actions flip
observations A goal not-goal
observe s0 A
observe goal goal
observe not-goal not-goal
init s0
goal goal
trans s0 flip 1/2 goal 0.5 not-goal
";

#[test]
fn synth_coin_flip_exit_codes() {
    let ok = fsc(&["synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.4", "--algo", "pandor"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("lgt: 1/2 (0.500000000000)\n"), "{}", stdout(&ok));
    let fail = fsc(&["synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.6"]);
    assert_eq!(code(&fail), 2);
    assert!(stdout(&fail).starts_with("outcome: failure-proved\n"));
}

#[test]
fn synth_json_schema() {
    let o = fsc(&["synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "2/5", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "controller");
    assert_eq!(v["algo"], "pandor");
    assert_eq!(v["lgt_star"], "2/5");
    assert_eq!(v["lgt"]["exact"], "1/2");
    assert_eq!(v["lgt"]["decimal"], "0.500000000000");
    assert_eq!(v["controller_states"], 1);
    for key in ["or_steps", "and_steps", "choice_points", "backtracks", "peak_depth", "wall_time_ms"] {
        assert!(v[key].is_number(), "{key}");
    }
    let f = fsc(&["synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.6", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&f)).unwrap();
    assert_eq!(v["outcome"], "failure-proved");
    assert!(v["lgt"].is_null() && v["controller"].is_null());
}

#[test]
fn andor_finds_hall_controller_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.fsc");
    let dot = dir.path().join("c.dot");
    let o = fsc(&[
        "synth", "--domain", "hall-a-1d", "--param", "n=5", "--max-states", "2", "--lgt-star", "0.99", "--algo", "andor",
        "--out", out.to_str().unwrap(), "--dot", dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = fs::read_to_string(&out).unwrap();
    for edge in ["edge 0 A → 0", "edge 0 B ← 1", "edge 0 - → 0", "edge 1 A stop 0", "edge 1 - ← 1"] {
        assert!(text.contains(edge), "{edge} missing from\n{text}");
    }
    let v = fsc(&["verify", "--domain", "hall-a-1d", "--param", "n=5", "--controller", out.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).starts_with("lgt: 1/1 (1.000000000000)\n"));
    let graph = fs::read_to_string(&dot).unwrap();
    assert_eq!(graph.matches(" -> q").count() - 1, 4, "{graph}");
}

#[test]
fn budget_exhaustion_exits_3() {
    let o = fsc(&["synth", "--domain", "hall-a-1d", "--param", "n=5", "--max-states", "2", "--lgt-star", "0.99", "--budget", "3"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("outcome: budget-exhausted\n"));
}

#[test]
fn verify_figure_controllers() {
    let dir = tempfile::tempdir().unwrap();
    let flip = write(dir.path(), "flip.fsc", "states 1\nstart 0\nedge 0 A flip 0\nedge 0 goal stop 0\n");
    let o = fsc(&["verify", "--domain", "decay-loop", "--controller", &flip]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("lgt: 1/1 (1.000000000000)\n"));

    let always_a = write(dir.path(), "a.fsc", "states 1\nstart 0\nedge 0 o a 0\n");
    let o = fsc(&["verify", "--domain", "three-state", "--controller", &always_a, "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["nonterm"]["exact"], "1/1");

    let env = write(dir.path(), "coin.env", COIN_FLIP);
    let flip_stop = write(dir.path(), "fs.fsc", "states 1\nstart 0\nedge 0 A flip 0\nedge 0 goal stop 0\nedge 0 not-goal stop 0\n");
    let o = fsc(&["verify", "--env", &env, "--controller", &flip_stop]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "lgt: 1/2 (0.500000000000)\nlter: 1/1 (1.000000000000)\nfail: 1/2 (0.500000000000)\n\
         nonterm: 0/1 (0.000000000000)\nundefined: 0/1 (0.000000000000)\n"
    );
}

#[test]
fn export_dot_styles_stop_edges() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.fsc", "states 1\nstart 0\n");
    let o = fsc(&["export-dot", "--domain", "coin-flip", "--controller", &empty]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("->").count(), 1);

    let noisy = write(
        dir.path(),
        "noisy.fsc",
        "states 2\nstart 0\nedge 0 A → 0\nedge 0 B ← 1\nedge 0 - → 0\nedge 1 A stop 0\nedge 1 B ← 1\nedge 1 - ← 1\n",
    );
    let o = fsc(&["export-dot", "--domain", "noisy-hall-a-1d", "--controller", &noisy]);
    let dot = stdout(&o);
    assert!(dot.contains("q1 -> q1 [label=\"B : ←\\n- : ←\"];"), "{dot}");
    assert!(dot.contains("q1 -> q1 [label=\"A : stop\", style=dashed];"), "{dot}");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&fsc(&["synth", "--max-states", "2"])), 64);
    assert_eq!(code(&fsc(&["synth", "--domain", "nope", "--max-states", "2", "--lgt-star", "0.5"])), 64);
    assert_eq!(code(&fsc(&["synth", "--domain", "hall-a-1d", "--param", "n=1", "--max-states", "2", "--lgt-star", "0.5"])), 64);
    assert_eq!(code(&fsc(&["synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "1.5"])), 64);
    assert_eq!(code(&fsc(&["synth", "--domain", "coin-flip", "--max-states", "0", "--lgt-star", "0.5"])), 64);
    assert_eq!(code(&fsc(&["frobnicate"])), 64);
    assert_eq!(code(&fsc(&["--help"])), 0);
    assert_eq!(code(&fsc(&["--version"])), 0);
}

#[test]
fn malformed_files_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.env", &COIN_FLIP.replace("0.5 not-goal", "0.4 not-goal"));
    let o = fsc(&["synth", "--env", &bad, "--max-states", "1", "--lgt-star", "0.4"]);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.env:"));

    let env = write(dir.path(), "coin.env", COIN_FLIP);
    let ctrl = write(dir.path(), "c.fsc", "states 1\nedge 0 A jump 0\n");
    assert_eq!(code(&fsc(&["verify", "--env", &env, "--controller", &ctrl])), 65);
    assert_eq!(code(&fsc(&["export-dot", "--env", &env, "--controller", &ctrl])), 65);
}

#[test]
fn synthesized_controllers_verify_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.fsc");
    for (domain, lgt) in [("coin-flip", "0.3"), ("decay-loop", "0.9"), ("bridgewalk", "0.6")] {
        let o = fsc(&["synth", "--domain", domain, "--max-states", "2", "--lgt-star", lgt, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{domain}");
        let v = fsc(&["verify", "--domain", domain, "--controller", out.to_str().unwrap(), "--json"]);
        let v: Value = serde_json::from_str(&stdout(&v)).unwrap();
        let got: f64 = v["lgt"]["decimal"].as_str().unwrap().parse().unwrap();
        assert!(got >= lgt.parse::<f64>().unwrap(), "{domain}: {got}");
    }
}

#[test]
fn bench_rows() {
    let o = fsc(&["bench", "--only", "coin-flip", "--only", "hall-a-1d", "--only", "noisy-hall-a-1d"]);
    assert_eq!(code(&o), 0);
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(rows.iter().any(|r| &r[col("domain")] == "coin-flip"));
    let noisy = rows.iter().find(|r| &r[col("domain")] == "noisy-hall-a-1d" && &r[col("params")] == "n=4 p=1/2").unwrap();
    assert_eq!(&noisy[col("exit_code")], "0");
    assert_eq!(&noisy[col("controller_states")], "2");
    let halls: Vec<_> = rows.iter().filter(|r| &r[col("domain")] == "hall-a-1d").collect();
    assert_eq!(halls.len(), 6);
    assert!(halls.iter().all(|r| &r[col("outcome")] == "controller"));
    assert_eq!(code(&fsc(&["bench", "--only", "nope"])), 64);
}
