use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_momentsupp"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("momentsupp-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", &path]);
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn moment(file: &Value, k: u64) -> String {
    file["moments"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["exp"][0].as_u64() == Some(k))
        .map(|m| m["value"].as_str().unwrap().to_string())
        .unwrap()
}

#[test]
fn gen_writes_moment_files() {
    let dir = workdir("gen");
    let two = gen(&dir, "two.json", &["--atoms", "(-1:3/4),(1/2:1/4)", "--degree", "64"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&two).unwrap()).unwrap();
    assert_eq!(v["moments"].as_array().unwrap().len(), 65);
    assert_eq!(moment(&v, 1), "-5/8");

    let uni = gen(&dir, "u.json", &["--family", "uniform01", "--degree", "32"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&uni).unwrap()).unwrap();
    for k in 0..=32 {
        assert_eq!(moment(&v, k), format!("1/{}", k + 1));
    }

    let out = run(&["gen", "--atoms", "(0:1)", "--degree", "8"]);
    let v = json(&out);
    assert!((1..=8).all(|k| moment(&v, k) == "0/1"));

    let leftovers: Vec<_> = fs::read_dir(&dir).unwrap().filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    assert_eq!(leftovers.len(), 2, "{leftovers:?}");
}

#[test]
fn check_passes_measures_and_flags_impossible_moments() {
    let dir = workdir("check");
    let two = gen(&dir, "two.json", &["--atoms", "(-1:3/4),(1/2:1/4)", "--degree", "32"]);
    let out = run(&["check", &two]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_pass"], Value::Bool(true));

    let bad = dir.join("bad.json");
    fs::write(
        &bad,
        r#"{"num_vars":1,"max_degree":4,"moments":[
            {"exp":[0],"value":"1"},{"exp":[1],"value":"0"},{"exp":[2],"value":"-1"},
            {"exp":[3],"value":"0"},{"exp":[4],"value":"1"}]}"#,
    )
    .unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let checks = report["checks"].as_array().unwrap();
    let psd = checks.iter().find(|c| c["name"] == "moment-matrix-psd").unwrap();
    assert_eq!(psd["passed"], Value::Bool(false));
    let roots = checks.iter().find(|c| c["name"] == "root-monotonicity").unwrap();
    assert!(roots["detail"].as_str().unwrap().contains("negative"));

    let g = gen(&dir, "g.json", &["--family", "gaussian", "--degree", "32"]);
    let out = run(&["check", &g]);
    let report = json(&out);
    assert_eq!(report["checks"][0]["passed"], Value::Bool(true));
    assert_eq!(report["growth"][0]["verdict"], "Diverging");
}

#[test]
fn growth_box_and_refusals() {
    let dir = workdir("growth");
    let two = gen(&dir, "two.json", &["--atoms", "(-1:3/4),(1/2:1/4)", "--degree", "64"]);
    let out = run(&["growth", &two, "--poly", "X"]);
    let p = json(&out);
    assert_eq!(p["verdict"], "Bounded");
    assert!((p["p_l_estimate"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = run(&["growth", &two, "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,value\n1,"));

    let out = run(&["box", &two, "--slack", "0.05"]);
    let b = json(&out);
    assert!((b["intervals"][0][1].as_f64().unwrap() - 1.05).abs() < 1e-12);

    let g = gen(&dir, "g.json", &["--family", "gaussian", "--degree", "64"]);
    assert_eq!(run(&["box", &g]).status.code(), Some(3));
    assert_eq!(run(&["mass", &g, "--alpha", "0"]).status.code(), Some(3));
}

#[test]
fn mass_finite_and_recovery() {
    let dir = workdir("mass");
    let two = gen(&dir, "two.json", &["--atoms", "(-1:3/4),(1/2:1/4)", "--degree", "128"]);
    let m = json(&run(&["mass", &two, "--alpha", "-1", "-d", "2"]));
    assert_eq!(m["value_exact"], "3/4");
    let csv = String::from_utf8(run(&["mass", &two, "--alpha", "1/2", "--format", "csv"]).stdout).unwrap();
    assert!(csv.lines().count() > 2);

    let f = json(&run(&["finite", &two, "--candidate", "-1", "--candidate", "1/2"]));
    assert_eq!(f["verdict"]["Finite"], 2);

    let p = json(&run(&["recover", &two]));
    assert_eq!(p["method"], "Prony1D");
    assert!(p["residual"].as_f64().unwrap() < 1e-10);
    let g = json(&run(&["recover", &two, "--method", "grid", "--floor", "0.1"]));
    let weights: Vec<f64> = g["atoms"].as_array().unwrap().iter().map(|a| a["weight"].as_f64().unwrap()).collect();
    assert_eq!(weights.len(), 2);
    assert!((weights[0] - 0.75).abs() < 0.1 && (weights[1] - 0.25).abs() < 0.1);

    let u = gen(&dir, "u.json", &["--family", "uniform01", "--degree", "64"]);
    assert_eq!(run(&["recover", &u]).status.code(), Some(3));
}

#[test]
fn exit_codes_for_bad_input_and_budgets() {
    let dir = workdir("codes");
    let junk = dir.join("junk.json");
    fs::write(&junk, "{not json").unwrap();
    assert_eq!(run(&["check", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--atoms", "(1:1/2)", "--degree", "4"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--family", "cauchy", "--degree", "4"]).status.code(), Some(2));

    let small = gen(&dir, "small.json", &["--atoms", "(1/2:1)", "--degree", "4"]);
    assert_eq!(run(&["mass", &small, "--alpha", "1/2", "-d", "2"]).status.code(), Some(4));
    assert_eq!(run(&["mass", &small, "--alpha", "1/2,0"]).status.code(), Some(2));
    assert_eq!(run(&["box", &small, "--format", "csv"]).status.code(), Some(2));

    let u = gen(&dir, "u.json", &["--family", "uniform01", "--degree", "64"]);
    let out = run(&["recover", &u, "--method", "grid", "--floor", "0.01", "--max-cells", "60"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn stdin_pipeline_and_deterministic_reports() {
    let gen_out = run(&["gen", "--atoms", "(-1:3/4),(1/2:1/4)", "--degree", "64"]);
    let a = run_stdin(&["report", "-", "--seed", "3"], &gen_out.stdout);
    let b = run_stdin(&["report", "--seed", "3"], &gen_out.stdout);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["recovery"]["atoms"].as_array().unwrap().len(), 2);
    assert_eq!(r["mass"][0]["value_exact"], "3/4");
    assert_eq!(r["finite"]["verdict"]["Finite"], 2);
    assert_eq!(r["check"]["all_pass"], Value::Bool(true));

    let biv = run(&["gen", "--atoms", "(1/2,-1/2:1)", "--degree", "16"]);
    let r = json(&run_stdin(&["report"], &biv.stdout));
    assert_eq!(r["recovery"]["atoms"].as_array().unwrap().len(), 1);
    assert_eq!(r["mass"][0]["value_exact"], "1/1");
}
