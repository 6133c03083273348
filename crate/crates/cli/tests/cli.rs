use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ecop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn write_sample(dir: &Path, n: &str, seed: &str, delta: &str) -> String {
    let out = ecop(&[
        "sample",
        "--alpha",
        "0.287",
        "--delta",
        delta,
        "--lambda1",
        "33.4",
        "--lambda2",
        "28.1",
        "--n",
        n,
        "--seed",
        seed,
    ]);
    assert!(out.status.success());
    let path = dir.join(format!("sample_{seed}.csv"));
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn validate_reports_infeasible_with_exit_2() {
    let out = ecop(&["validate", "--alpha", "3.8", "--delta", "0.06"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["results"]["feasible"], false);
    let ds = v["results"]["delta_star"].as_f64().unwrap();
    assert!((ds - 0.0535).abs() < 5e-5);

    let out = ecop(&["--pretty", "validate", "--alpha", "3.8", "--delta", "0.06"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"delta_star\": 0.0535"));

    let out = ecop(&["validate", "--alpha", "-3", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["feasible"], true);
}

#[test]
fn measures_at_independence_are_zero() {
    let out = ecop(&["measures", "--alpha", "0", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for k in ["rho", "gamma", "tau", "eta", "phi"] {
        assert_eq!(v["results"]["closed_form"][k].as_f64(), Some(0.0), "{k}");
    }
}

#[test]
fn measures_oracle_agrees() {
    let out = ecop(&["measures", "--alpha", "3.8", "--delta", "0.05", "--oracle"]);
    assert!(out.status.success());
    let v = json(&out);
    for k in ["rho", "gamma", "tau", "eta", "phi"] {
        assert!(
            v["results"]["abs_difference"][k].as_f64().unwrap() < 1e-8,
            "{k}"
        );
    }
}

#[test]
fn table1_default_grid_and_pretty_row() {
    let v = json(&ecop(&["table1"]));
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 28);

    let out = ecop(&["--pretty", "table1", "--alpha-list", "2"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row: Vec<String> = v["results"]["rows"][0]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.to_string())
        .collect();
    assert_eq!(row, ["2", "0.25", "0.506", "0.4174"]);

    let v = json(&ecop(&["table1", "--alpha-list", "-3,0,4.1"]));
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn eval_and_properties() {
    let v = json(&ecop(&[
        "eval", "--alpha", "2", "--delta", "0.25", "--u", "0.5", "--v", "0.5",
    ]));
    let cdf = v["results"]["cdf"].as_f64().unwrap();
    let k = 1.0 - 0.5f64.exp();
    assert!((cdf - (0.25 + 0.25 * k * k)).abs() < 1e-15);

    let v = json(&ecop(&[
        "properties",
        "--alpha",
        "1",
        "--delta",
        "0.5",
        "--grid",
        "51",
    ]));
    assert_eq!(v["results"]["quadrant"]["verdict"], "positive");
    assert_eq!(v["results"]["tp2"]["tp2"], true);
}

#[test]
fn exit_codes_under_fault_injection() {
    // Missing file.
    let out = ecop(&["fit", "--input", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    // Unknown flag and missing required flag.
    assert_eq!(ecop(&["table1", "--bogus"]).status.code(), Some(2));
    assert_eq!(ecop(&["validate", "--alpha", "1"]).status.code(), Some(2));
    // Infeasible parameters outside validate.
    let out = ecop(&["measures", "--alpha", "1", "--delta", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    // Bad row in strict mode names the line; lenient mode skips it.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n2,3\n-3,1\n4,5\n5,6\n6,7\n").unwrap();
    let bad = bad.to_str().unwrap();
    let out = ecop(&["ks", "--input", bad, "--column", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = ecop(&["ks", "--input", bad, "--column", "x", "--lenient"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["rejected_rows"], 1);
}

#[test]
fn runs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = ecop(&[
        "sample", "--alpha", "3.8", "--delta", "0.05", "--n", "500", "--seed", "3",
    ]);
    let b = ecop(&[
        "sample", "--alpha", "3.8", "--delta", "0.05", "--n", "500", "--seed", "3",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let input = write_sample(dir.path(), "300", "11", "10.398");
    let f1 = ecop(&["fit", "--input", &input, "--seed", "4"]);
    let f2 = ecop(&["fit", "--input", &input, "--seed", "4"]);
    assert!(f1.status.success());
    assert_eq!(f1.stdout, f2.stdout);
    let t = ecop(&["table1"]);
    assert_eq!(t.stdout, ecop(&["table1"]).stdout);
    assert!(json(&ecop(&["--timing", "table1"]))["wall_time_s"].is_number());
}

#[test]
fn sample_piped_into_fit_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path(), "2000", "21", "10.398");
    let out = ecop(&["fit", "--input", &input]);
    assert!(out.status.success());
    let v = json(&out);
    let fit = &v["results"]["fit"];
    let l1 = fit["params"]["lambda1"].as_f64().unwrap();
    let l2 = fit["params"]["lambda2"].as_f64().unwrap();
    assert!((l1 / 33.4 - 1.0).abs() < 0.05, "lambda1 {l1}");
    assert!((l2 / 28.1 - 1.0).abs() < 0.05, "lambda2 {l2}");
    assert_eq!(fit["k"], 4);
    assert_eq!(fit["n"], 2000);
    let published = v["results"]["comparison"]["published"].as_array().unwrap();
    let names: Vec<_> = published
        .iter()
        .map(|m| m["model"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["BGED", "BMOED", "BGRD", "BRD"]);

    let ks = json(&ecop(&["ks", "--input", &input, "--column", "y"]));
    assert!(ks["results"]["ks"]["p_value"].as_f64().unwrap() > 0.01);
}

#[test]
fn independent_sample_fits_near_zero_rho() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_sample(dir.path(), "2000", "5", "0");
    let v = json(&ecop(&["fit", "--input", &input]));
    let p = &v["results"]["fit"]["params"]["copula"];
    let (a, d) = (p["alpha"].as_f64().unwrap(), p["delta"].as_f64().unwrap());
    let measures = json(&ecop(&[
        "measures",
        "--alpha",
        &a.to_string(),
        "--delta",
        &d.to_string(),
    ]));
    let rho = measures["results"]["closed_form"]["rho"].as_f64().unwrap();
    assert!(rho.abs() < 0.05, "rho {rho}");
}
