use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hiercorr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hiercorr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ghz_file() -> PathBuf {
    let mut rows = vec![vec![[0.0, 0.0]; 8]; 8];
    for (r, c) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
        rows[r][c] = [0.5, 0.0];
    }
    let text = serde_json::json!({"shape": {"sizes": [2, 2, 2], "kinds": "quantum"}, "matrix": rows});
    scratch("ghz.json", &text.to_string())
}

#[test]
fn ghz_c2_is_log_two() {
    let path = ghz_file();
    let out = run(&["ck", "--state", path.to_str().unwrap(), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let c2 = v["results"]["value"].as_f64().unwrap();
    assert!((c2 - std::f64::consts::LN_2).abs() < 1e-6, "{c2}");
    assert_eq!(v["command"], "ck");
}

#[test]
fn bits_divide_by_log_two() {
    let path = ghz_file();
    let out = run(&["multiinfo", "--state", path.to_str().unwrap(), "--units", "bits"]);
    let v = json(&out);
    assert!((v["results"]["value"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(v["diagnostics"]["units"], "bits");
}

#[test]
fn exhaustive_feasibility_lists_the_y_orbit() {
    let out = run(&["feasibility", "--shape", "2,2,2", "--k", "2", "--exhaustive", "--max-size", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let minimal = v["results"]["minimal_non_feasible"].as_array().unwrap();
    let y = serde_json::json!(["001", "010", "100"]);
    let found = minimal.iter().any(|s| {
        let mut labels: Vec<_> = s.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
        labels.sort();
        serde_json::json!(labels) == y
    });
    assert!(found, "{minimal:?}");
}

#[test]
fn single_support_check() {
    let out = run(&["feasibility", "--shape", "2,2,2", "--k", "2", "--support", "000,111"]);
    assert_eq!(json(&out)["results"]["feasible"], true);
    let out = run(&["feasibility", "--shape", "2,2,2", "--k", "2", "--support", "100,010,001"]);
    assert_eq!(json(&out)["results"]["feasible"], false);
}

#[test]
fn theorem1_bound_holds() {
    let out = run(&["theorem1", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["passed"], true);
}

#[test]
fn malformed_input_exits_with_validation_code() {
    let bad = scratch("bad.json", "{\"shape\": {\"sizes\": [2]}, \"matrix\": [[[1, 0]]]}");
    let out = run(&["multiinfo", "--state", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run(&["bell", "--t", "0.1,0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_gives_same_results() {
    let args = ["maximize", "--shape", "2,2", "--kinds", "classical", "--k", "1", "--restarts", "4", "--seed", "7"];
    let a = json(&run(&args));
    let b = json(&run(&args));
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn loosened_tolerance_is_flagged() {
    let out = run(&["demo", "--only", "7", "--tol", "1e-1"]);
    let v = json(&out);
    assert_eq!(v["diagnostics"]["non_standard"], true);

    let out = run(&["demo", "--only", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["diagnostics"]["non_standard"], false);
}

#[test]
fn toric_csv_goes_to_the_out_file() {
    let path = std::env::temp_dir().join(format!("hiercorr-toric-{}.csv", std::process::id()));
    let out = run(&["toric", "--shape", "2,2,2", "--k", "2", "--csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["diagnostics"]["kernel_rank"], 1);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.contains("kernel"));
}
