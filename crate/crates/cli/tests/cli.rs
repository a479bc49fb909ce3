use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropscat")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A temporary directory holding `d3.json`, the order-3 diagram of the
/// projective plane.
fn with_d3() -> (TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d3.json");
    let out = run(&["scatter", "--base", "cps-p2", "--order", "3", "-o", path_str(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = path_str(&file).to_owned();
    (dir, s)
}

#[test]
fn scatter_toy_has_three_rays() {
    let doc = ok_json(&["scatter", "--base", "toy-two-wall", "--order", "2"]);
    assert_eq!(doc["rays"].as_array().unwrap().len(), 3);
    assert_eq!(doc["order"], 2);
}

#[test]
fn scatter_is_byte_identical_across_runs() {
    let a = run(&["scatter", "--order", "3"]).stdout;
    let b = run(&["--threads", "2", "scatter", "--order", "3", "--reverse"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn thread_count_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_tropscat"))
        .env("TROPSCAT_THREADS", "1")
        .args(["scatter", "--base", "toy-two-wall", "--order", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(out.stdout, run(&["scatter", "--base", "toy-two-wall", "--order", "2"]).stdout);
}

#[test]
fn order_zero_is_a_usage_error() {
    let out = run(&["scatter", "--order", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"], "Usage");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(run(&["scatter", "--bogus"]).status.code(), Some(2));
}

#[test]
fn missing_and_corrupt_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = run(&["relgw", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["error"], "Io");

    let corrupt = dir.path().join("bad.json");
    std::fs::write(&corrupt, "{\"rays\": 3").unwrap();
    let out = run(&["verify", path_str(&corrupt)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_of(&out)["message"].as_str().is_some());
}

#[test]
fn potential_at_the_origin() {
    let (_dir, d3) = with_d3();
    let doc = ok_json(&["potential", &d3, "--at", "1/100,1/100"]);
    let outward = doc["outward"].as_object().unwrap();
    let keys: Vec<&str> = outward.keys().map(String::as_str).collect();
    assert_eq!(keys, vec!["-1,-1;0", "0,1;0", "1,0;0"]);
    assert!(outward.values().all(|v| v == "1"));

    let built = ok_json(&["potential", "--base", "cps-p2", "--order", "3", "--at", "1/100,1/100"]);
    assert_eq!(built["outward"], doc["outward"]);
}

#[test]
fn potential_on_a_wall_suggests_an_offset() {
    let (_dir, d3) = with_d3();
    let out = run(&["potential", &d3, "--at", "1,0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_of(&out);
    assert_eq!(err["error"], "NonGenericEndpoint");
    assert_eq!(err["suggestion"].as_array().unwrap().len(), 2);

    let doc = ok_json(&["potential", &d3, "--at", "1,0", "--nudge"]);
    assert_eq!(doc["point"], err["suggestion"]);
    assert_eq!(doc["requested"], serde_json::json!(["1", "0"]));
}

#[test]
fn potential_lines_and_svg() {
    let (dir, d3) = with_d3();
    let svg = dir.path().join("w.svg");
    let doc = ok_json(&["potential", &d3, "--at", "1/37,-1/41", "--lines", "--svg", path_str(&svg)]);
    assert_eq!(doc["lines"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&svg).unwrap();
    roxmltree::Document::parse(&text).unwrap();
}

#[test]
fn chamber_sweep_of_the_toy() {
    let doc = ok_json(&["potential", "--base", "toy-two-wall", "--order", "2", "--sweep", "3"]);
    let chambers = doc["chambers"].as_array().unwrap();
    assert!(chambers.len() >= 3, "{chambers:?}");
    let terms: Vec<&Value> = chambers.iter().map(|c| &c["terms"]).collect();
    for (i, t) in terms.iter().enumerate() {
        assert!(!terms[..i].contains(t), "chambers must have distinct potentials");
    }
}

#[test]
fn relgw_degree_one_row() {
    let (_dir, d3) = with_d3();
    let out = run(&["relgw", &d3]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("degree,n,n_from_log,bps,integral"));
    assert_eq!(lines.next(), Some("1,9,9,9,true"));

    let doc = ok_json(&["relgw", &d3, "--format", "json"]);
    assert_eq!(doc["rows"][0]["n"], "9");
    assert_eq!(doc["rows"][0]["rays"].as_array().unwrap().len(), 3);
}

#[test]
fn relgw_beyond_the_stable_range_fails() {
    let (_dir, d3) = with_d3();
    let out = run(&["relgw", &d3, "--max-degree", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["error"], "NotStabilized");
}

#[test]
fn verify_reports_no_defects() {
    let (_dir, d3) = with_d3();
    let doc = ok_json(&["verify", &d3, "--samples", "20"]);
    assert_eq!(doc["defects"], 0);
    assert!(doc["wallcross_pairs"].as_u64().unwrap() >= 20);
    assert!(doc["summary"].as_str().unwrap().starts_with("0 defects"));
}

#[test]
fn plot_is_well_formed_svg() {
    let (dir, d3) = with_d3();
    let svg = dir.path().join("d3.svg");
    let out = run(&["plot", &d3, "-o", path_str(&svg), "--at", "1/100,1/100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let groups: Vec<_> = doc.root_element().children().filter_map(|n| n.attribute("id")).collect();
    assert_eq!(groups, vec!["cuts", "rays", "broken-lines", "singularities"]);
}

#[test]
fn scatter_from_a_base_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.json");
    std::fs::write(&base, tropscat::affine::AffineBase::cps_p2().to_json()).unwrap();
    let from_file = run(&["scatter", "--base", path_str(&base), "--order", "2"]).stdout;
    assert_eq!(from_file, run(&["scatter", "--order", "2"]).stdout);

    let text = String::from_utf8(from_file).unwrap();
    let d = tropscat::scattering::ScatteringDiagram::from_json(&text).unwrap();
    assert_eq!(d.to_json().trim_end(), text.trim_end());
}
