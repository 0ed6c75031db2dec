use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use setid::artstein::SelectionFeasibility;
use setid::elections::{FigureDocument, RaceSummary};
use setid::polytope::ConvexRegion2D;
use setid::rational::q;
use setid::sim::SimulationReport;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn setid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setid")).args(args).env_remove("SETID_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn binary_region_with_svg() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("jsc1_rect.json");
    let status = setid(&["region", "binary", "--p0", "0.338", "--p1", "0.662", "--svg", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let region: ConvexRegion2D = serde_json::from_value(doc["region"].clone()).unwrap();
    assert_eq!(region, ConvexRegion2D::rectangle(&q("0.662"), &q("0.338")).unwrap());
    let svg = std::fs::read_to_string(dir.path().join("jsc1_rect.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("(0.662, 0.338)"));
}

#[test]
fn binary_region_stages() {
    let dir = TempDir::new().unwrap();
    let iv = write(&dir, "iv.json", r#"{"first": {"p0": "0.351", "p1": "0.649"}, "second": {"p0": "0.325", "p1": "0.675"}}"#);
    let doc = json(&setid(&[
        "region",
        "binary",
        "--p0",
        "0.338",
        "--p1",
        "0.662",
        "--iv",
        &iv,
        "--gamma",
        "0.247",
        "--unobserved-mode",
        "all-incomparable",
    ]));
    assert_eq!(doc["delta0"], "13/500");
    let names: Vec<&str> = doc["stages"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["no-assumption", "iv", "abstention"]);
    let nu = json(&setid(&["region", "binary", "--p0", "2/5", "--p1", "3/5", "--nu", "0.15"]));
    assert_eq!(nu["region"]["vertices"].as_array().unwrap().len(), 5);
    assert_eq!(nu["max_decided"], "17/20");
}

#[test]
fn multi_region_dump() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"["1/3", "1/3", "1/3"]"#);
    let doc = json(&setid(&["region", "multi", "--p", &p, "--n", "3"]));
    assert_eq!(doc["sharp"]["coordinates"].as_array().unwrap().len(), 7);
    assert_eq!(doc["support"].as_array().unwrap().len(), 7);
    let witnesses = doc["strict_inclusion_witnesses"].as_array().unwrap();
    let found: Vec<(&str, bool)> = witnesses.iter().map(|w| (w["subset"].as_str().unwrap(), !w["witness"].is_null())).collect();
    assert_eq!(found, [("0,1", true), ("0,2", true), ("1,2", true), ("0,1,2", false)]);
    assert_eq!(setid(&["region", "multi", "--p", &p, "--n", "2"]).status.code(), Some(2));
}

#[test]
fn oracle_exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"["0.4", "0.6"]"#);
    let bad = write(&dir, "bad.json", r#"["0.5", "0.5", "0"]"#);
    let out = setid(&["oracle", "--theta", &bad, "--p", &p]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("infeasible: θ₀ > p₀"), "{}", stderr(&out));
    let result: SelectionFeasibility = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!result.feasible);

    let good = write(&dir, "good.json", r#"{"n": 2, "masses": {"0": "0.3", "1": "0.5", "0,1": "0.2"}}"#);
    let out = setid(&["oracle", "--theta", &good, "--p", &p]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).starts_with("feasible"));
    let result: SelectionFeasibility = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result.max_flow, q("1"));
}

#[test]
fn policy_prediction() {
    let doc = json(&setid(&["policy", "--p1", "0.5", "--sigma", "0", "--delta", "1", "--cdf", "probit"]));
    assert!((doc["complete"].as_f64().unwrap() - 0.8413).abs() < 1e-4);
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.csv", "x,cdf\n-1,0\n0,0.5\n1,0.9\n2,1\n");
    let doc = json(&setid(&["policy", "--p1", "0.3", "--sigma", "0.5", "--delta", "0.5", "--cdf", "logit", "--nonparametric", &f]));
    assert_eq!(doc["incomplete"]["sign"], "negative-possible");
    assert!((doc["nonparametric"]["f_at_delta"].as_f64().unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(setid(&["--help"]).status.code(), Some(0));
    assert_eq!(setid(&["--version"]).status.code(), Some(0));
    assert_eq!(setid(&[]).status.code(), Some(1));
    assert_eq!(setid(&["region", "binary", "--p0", "x", "--p1", "1"]).status.code(), Some(1));
    assert_eq!(setid(&["region", "binary", "--p0", "0.5", "--p1", "0.6"]).status.code(), Some(2));
    assert_eq!(setid(&["knightian", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
    let infeasible = setid(&["region", "binary", "--p0", "0.3", "--p1", "0.7", "--pi0", "0.4", "--pi1", "0"]);
    assert_eq!(infeasible.status.code(), Some(3));
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"alternatives": 2,
            "preferences": {"kind": "interval",
              "midpoints": [{"family": "normal", "mean": 0, "sd": 1}, {"family": "normal", "mean": 0.2, "sd": 1}],
              "half_widths": [{"family": "constant", "value": 0.3}, {"family": "constant", "value": 0.3}]},
            "size": 3000}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec!["simulate", "--spec", spec.as_str(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(setid(&args).status.success());
        std::fs::read(out).unwrap()
    };
    let first = run(&a, &["--seed", "9"]);
    let second = run(&b, &["--seed", "9", "--mode", "sequential"]);
    assert_eq!(first, second);
    let doc: Value = serde_json::from_slice(&first).unwrap();
    let report: SimulationReport = serde_json::from_value(doc["report"].clone()).unwrap();
    assert_eq!(report.seed, 9);
    assert_eq!(doc["artstein"]["passed"], true);

    assert_eq!(setid(&["simulate", "--spec", &spec]).status.code(), Some(1));

    let with_env = |seed: &str, extra: &[&str]| {
        let mut args = vec!["simulate", "--spec", spec.as_str()];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_setid")).args(&args).env("SETID_SEED", seed).output().unwrap();
        json(&out)["report"]["seed"].as_u64().unwrap()
    };
    assert_eq!(with_env("21", &[]), 21);
    assert_eq!(with_env("21", &["--seed", "4"]), 4);
}

#[test]
fn election_figures() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("jsc1.json");
    let data = fixture("lorain_2018.csv");
    let config = fixture("lorain_2018_config.json");
    let status = setid(&[
        "election",
        "--data",
        data.to_str().unwrap(),
        "--race",
        "JSC1",
        "--config",
        config.to_str().unwrap(),
        "--figures",
        "--svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", stderr(&status));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let summary: RaceSummary = serde_json::from_value(doc["summary"].clone()).unwrap();
    assert_eq!(summary.votes, [29_564, 57_961]);
    assert_eq!(doc["rotation"]["balanced"], true);
    let figures = doc["figures"].as_array().unwrap();
    assert_eq!(figures.len(), 3);
    for f in figures {
        let _: FigureDocument = serde_json::from_value(f["document"].clone()).unwrap();
        let name = f["name"].as_str().unwrap();
        assert!(dir.path().join(format!("jsc1-{name}.svg")).exists());
    }

    let plain = json(&setid(&["election", "--data", data.to_str().unwrap(), "--race", "JSC2", "--iv"]));
    assert_eq!(plain["figure"]["stages"].as_array().unwrap().len(), 4);
    let missing = setid(&["election", "--data", data.to_str().unwrap(), "--race", "JSC2", "--consideration"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn knightian_comparisons() {
    let wide = json(&setid(&["knightian", "--model", fixture("knightian_wide.json").to_str().unwrap()]));
    assert_eq!(wide["pairs"][0]["comparison"], "incomparable");
    assert_eq!(wide["nondominated"], serde_json::json!(["a0", "a1"]));
    let narrow = json(&setid(&["knightian", "--model", fixture("knightian_narrow.json").to_str().unwrap()]));
    assert_eq!(narrow["pairs"][0]["comparison"], "first-preferred");
    assert_eq!(narrow["pairs"][0]["min_x_minus_y"], "1/5");
}
