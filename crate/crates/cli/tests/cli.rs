use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn maj3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maj3"))
        .args(args)
        .arg("--quiet")
        .env_remove("MAJ3_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sample_is_deterministic_per_seed() {
    let a = maj3(&["sample", "--h", "2", "--count", "5", "--seed", "7"]);
    let b = maj3(&["sample", "--h", "2", "--count", "5", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let records: Vec<&str> = text.lines().collect();
    assert_eq!(records.len(), 10);
    for pair in records.chunks(2) {
        let x = maj3_core::HardInput::from_fixture(&format!("{}\n{}\n", pair[0], pair[1])).unwrap();
        assert!(x.input().is_hard());
    }
    let c = maj3(&["sample", "--h", "2", "--count", "5", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let env = Command::new(env!("CARGO_BIN_EXE_maj3"))
        .args(["sample", "--h", "3", "--count", "2", "--quiet"])
        .env("MAJ3_SEED", "11")
        .output()
        .unwrap();
    let flag = maj3(&["sample", "--h", "3", "--count", "2", "--seed", "11"]);
    assert_eq!(env.stdout, flag.stdout);
}

#[test]
fn sample_with_root_zero_at_height_one() {
    let o = maj3(&["sample", "--h", "1", "--root", "0", "--count", "1000", "--seed", "1"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().filter(|l| !l.starts_with("h=")) {
        assert!(["001", "010", "100"].contains(&line), "{line}");
    }
}

#[test]
fn sample_height_cap() {
    let o = maj3(&["sample", "--h", "19", "--count", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(maj3(&["estimate", "--alg", "bogus", "--h", "2"]).status.code(), Some(3));
    assert_eq!(maj3(&["nonsense"]).status.code(), Some(3));
    assert_eq!(maj3(&["expect", "--alg", "naive", "--input", "0101"]).status.code(), Some(3));
    assert_eq!(maj3(&["--help"]).status.code(), Some(0));
}

#[test]
fn estimate_full_read_is_exact() {
    let o = maj3(&["estimate", "--alg", "full", "--h", "3", "--trials", "10"]);
    let v = json(&o);
    assert_eq!(v["mean"], 27.0);
    assert_eq!(v["stddev"], 0.0);
    assert_eq!(v["alg"], "full");
}

#[test]
fn estimate_naive_matches_closed_form() {
    let v = json(&maj3(&["estimate", "--alg", "naive", "--h", "6", "--trials", "100000", "--seed", "3"]));
    let target = (8.0f64 / 3.0).powi(6);
    let se = v["stddev"].as_f64().unwrap() / 100000f64.sqrt();
    assert!((v["mean"].as_f64().unwrap() - target).abs() <= 3.0 * se, "{v}");
}

#[test]
fn estimate_range_reports_growth() {
    let v = json(&maj3(&["estimate", "--alg", "naive", "--h", "1", "--h-max", "3", "--trials", "2000"]));
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
    assert_eq!(v["growth"].as_array().unwrap().len(), 2);
}

#[test]
fn estimate_is_thread_independent() {
    let args = ["estimate", "--alg", "depth2", "--h", "3", "--trials", "3000", "--seed", "5"];
    let one = maj3(&[&args[..], &["--threads", "1"]].concat());
    let two = maj3(&[&args[..], &["--threads", "2"]].concat());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn expect_exact_values() {
    let v = json(&maj3(&["expect", "--alg", "depth2", "--hard", "1"]));
    assert_eq!(v["expected"], "8/3");
    let v = json(&maj3(&["expect", "--alg", "naive", "--hard", "2"]));
    assert_eq!(v["expected"], "64/9");
    let v = json(&maj3(&["expect", "--alg", "depth2", "--input", "011", "--entry", "complete:root:0"]));
    assert_eq!(v["expected"], "2");
}

#[test]
fn recurrences_csv() {
    let o = maj3(&["recurrences", "--max-h", "40"]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 41);
    assert_eq!(&rows[1][1], "8/3");
    assert_eq!(&rows[2][1], "571/81");
    assert_eq!(&rows[1][2], "3/2");
    assert_eq!(&rows[1][3], "2");
}

#[test]
fn alpha_small() {
    let v = json(&maj3(&["alpha", "--k", "2"]));
    assert_eq!(v["alpha"], "24/7");
    assert_eq!(v["n_k"], 7);
    let v = json(&maj3(&["alpha", "--k", "3"]));
    assert_eq!(v["alpha"], "12231/2203");
    assert_eq!(v["n_k"], 112);
    assert_eq!(maj3(&["alpha", "--k", "5"]).status.code(), Some(4));
}

#[test]
fn bounds_base_above_threshold() {
    let v = json(&maj3(&[
        "bounds", "--k", "4", "--alpha", "2027349/216164", "--delta", "0", "--h", "1", "--precision", "6",
    ]));
    let lo = maj3_core::rational::parse(v["base"]["lo"].as_str().unwrap()).unwrap();
    assert!(lo > maj3_core::rational::parse("2.57143").unwrap());
    let v = json(&maj3(&["bounds", "--k", "1", "--alpha", "2", "--h", "3"]));
    assert_eq!(v["exact_base"], "5/2");
}

#[test]
fn verify_suites_pass() {
    for suite in ["oracles", "ansatz", "encodings"] {
        let o = maj3(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        assert_eq!(json(&o)["passed"], true);
    }
}

#[test]
fn verify_tampered_fixture_fails_with_diff() {
    let path = scratch("tampered.json");
    std::fs::write(&path, r#"{"alpha_2": "25/7"}"#).unwrap();
    let o = maj3(&["verify", "--suite", "all", "--expected", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["passed"], false);
    assert_eq!(v["diff"][0], "alpha_2: expected 25/7, got 24/7");
}

#[test]
fn dump_classes_lists_every_class() {
    let o = maj3(&["dump-classes", "--k", "2"]);
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 7);
    let o = maj3(&["dump-classes", "--k", "2", "--alpha", "24/7"]);
    let root: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(root.iter().all(|v| v["rho"].is_string() && v["choice"].is_string()));
}

#[test]
fn manifest_next_to_output_and_byte_identical_results() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for p in [&a, &b] {
        let o = maj3(&["recurrences", "--max-h", "10", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let m: Value = serde_json::from_slice(&std::fs::read(scratch("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "recurrences");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["started"].is_string() && m["finished"].is_string());
}
