use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn mexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mexp"))
        .args(args)
        .env("MEXP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_generated(dir: &Path, file: &str, args: &[&str]) -> String {
    let out = mexp(&[&["generate"], args].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(file);
    std::fs::write(&path, &out.stdout).unwrap();
    path.display().to_string()
}

const C6: &str = r#"{"vertices": [{"id": 0, "m": "1"}, {"id": 1, "m": "1"}, {"id": 2, "m": "1"},
  {"id": 3, "m": "1"}, {"id": 4, "m": "1"}, {"id": 5, "m": "1"}],
  "edges": [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]]}"#;

fn c6() -> String {
    let dir = scratch("c6");
    let path = dir.join("c6.json");
    std::fs::write(&path, C6).unwrap();
    path.display().to_string()
}

#[test]
fn vertex_cheeger_of_c6() {
    let input = c6();
    let out = mexp(&["cheeger", "--input", &input, "--flavor", "vertex"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["results"]["value"], "2/3");
    assert_eq!(report["results"]["flavor"], "vertex-measured");
    assert_eq!(report["results"]["witness"].as_array().unwrap().len(), 3);
    assert_eq!(report["command"][0], "cheeger");
    assert_eq!(report["seed"], 0);
    assert!(report["version"].is_string());
}

#[test]
fn conductance_cheeger_and_profile() {
    let input = c6();
    let out = mexp(&["cheeger", "--input", &input, "--flavor", "conductance"]);
    assert_eq!(json(&out)["results"]["value"], "1/3");
    let out = mexp(&["cheeger", "--input", &input, "--alpha", "1/2,1/6"]);
    assert_eq!(out.status.code(), Some(0));
    let cells = json(&out)["results"]["profile"].as_array().unwrap().clone();
    assert_eq!(cells.len(), 6);
    assert_eq!(cells[0]["value"], "2/3");
}

#[test]
fn cheeger_sandwich_holds_on_c6() {
    let input = c6();
    let out = mexp(&["verify", "--theorem", "cheeger-sandwich", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["holds"], true);
    assert_eq!(r["results"]["inputsDigest"]["c"], "1/3");
}

#[test]
fn every_theorem_runs_on_c6() {
    let input = c6();
    for theorem in [
        "measured-sandwich",
        "gap-controls",
        "distance-bound",
        "poincare-to-cheeger",
        "coarea",
        "lp-poincare",
    ] {
        let out = mexp(&["verify", "--theorem", theorem, "--input", &input, "--restarts", "4"]);
        assert_eq!(out.status.code(), Some(0), "{theorem}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["results"]["holds"], true, "{theorem}");
    }
    let out = mexp(&[
        "verify", "--theorem", "distance-bound", "--input", &input, "--set-a", "0", "--set-b", "3",
    ]);
    assert_eq!(json(&out)["results"]["checks"][0]["rhs"], "6");
}

#[test]
fn broken_input_exits_2() {
    let dir = scratch("broken");
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"vertices\": [").unwrap();
    let out = mexp(&["cheeger", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mexp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mexp(&["cheeger"]).status.code(), Some(2));
    assert_eq!(mexp(&["generate", "cycle"]).status.code(), Some(2));
}

#[test]
fn spectrum_and_poincare() {
    let input = c6();
    let out = mexp(&["spectrum", "--input", &input, "--operator", "lambda"]);
    let r = json(&out);
    assert!((r["results"]["gap"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(r["results"]["operator"], "lambda");
    let out = mexp(&["poincare", "--input", &input, "--p", "2", "--restarts", "8", "--seed", "3"]);
    let first = json(&out)["results"]["estimate"].as_f64().unwrap();
    assert!((first - 0.5).abs() < 1e-6);
    let again = json(&mexp(&["poincare", "--input", &input, "--p", "2", "--restarts", "8", "--seed", "3"]));
    assert_eq!(again["results"]["estimate"].as_f64().unwrap().to_bits(), first.to_bits());
}

#[test]
fn coarea_with_explicit_function() {
    let input = c6();
    let out = mexp(&["coarea", "--input", &input, "--function", "0,1/2,2,2,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["report"]["equal"], true);
    let out = mexp(&["coarea", "--input", &input, "--function", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_is_seeded() {
    let a = mexp(&["generate", "random-regular", "10", "3", "--seed", "7", "--measure", "rationals"]);
    let b = mexp(&["generate", "random-regular", "10", "3", "--seed", "7", "--measure", "rationals"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let g = json(&a);
    assert_eq!(g["vertices"].as_array().unwrap().len(), 10);
    assert_eq!(g["edges"].as_array().unwrap().len(), 15);
}

#[test]
fn family_over_cycles() {
    let dir = scratch("family");
    for (i, n) in [4, 6, 8, 10].iter().enumerate() {
        write_generated(&dir, &format!("{i:02}.json"), &["cycle", &n.to_string()]);
    }
    let out = mexp(&["family", "--dir", dir.to_str().unwrap(), "--threshold", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let cs: Vec<&str> = r["results"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["c"].as_str().unwrap())
        .collect();
    assert_eq!(cs, ["1", "2/3", "1/2", "2/5"]);
    assert_eq!(r["results"]["expanderVerdict"]["holds"], false);
    assert_eq!(r["results"]["ghostlyTrend"]["verdict"], "consistent");
}

#[test]
fn certify_cycle_family() {
    let dir = scratch("certify");
    write_generated(&dir, "a.json", &["cycle", "40", "--measure", "probability"]);
    write_generated(&dir, "b.json", &["cycle", "64", "--measure", "probability"]);
    let rho = dir.join("rho.txt");
    std::fs::write(&rho, "[[0, 0], [1, 1]]").unwrap();
    let out = mexp(&[
        "certify", "--dir", dir.to_str().unwrap(), "--p", "1", "--rho", rho.to_str().unwrap(), "--maps", "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["results"]["holds"], true);
    assert_eq!(r["results"]["rows"][1]["r"].as_f64().unwrap(), 3.0);
}

#[test]
fn reports_are_stable_across_runs() {
    let input = c6();
    let strip = |mut v: Value| {
        v["timing"] = Value::Null;
        v
    };
    let a = strip(json(&mexp(&["verify", "--theorem", "measured-sandwich", "--input", &input])));
    let b = strip(json(&mexp(&["verify", "--theorem", "measured-sandwich", "--input", &input])));
    assert_eq!(a, b);
}
