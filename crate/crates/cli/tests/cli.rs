use std::path::Path;
use std::process::{Command, Output};

fn mqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqs")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let out = dir.join(name);
    let mut full = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    full.extend(["--out", &out_s]);
    let o = mqs(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    assert!(!o.status.success());
    serde_json::from_slice(o.stderr.trim_ascii_end()).expect("stderr is a JSON object")
}

const CAT: &[&str] = &["universal-curve", "--alpha", "2", "--phi", "1.5707963267948966", "--grid", "0,0.1,0.3"];
const QIOPA: &[&str] = &["qiopa-vis", "--gains", "0.5,0.8", "--grid", "0,0.2"];
const OFILTER: &[&str] = &["ofilter-vis", "--gains", "0.5", "--thresholds", "0,1", "--grid", "0,0.2"];

#[test]
fn headers_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (CAT, "x,R,alpha,phi,D_closed,D_numeric"),
        (QIOPA, "g,R,x,F,D,mean_n"),
        (OFILTER, "g,k,R,x,F,D,success_prob"),
        (&["cat-dist", "--alpha", "1.5", "--phi", "1", "--grid", "0,0.5"], "label,index_m,index_n,probability"),
        (&["qiopa-dist", "--gains", "0.3", "--grid", "0.5", "--basis", "hv"], "label,index_m,index_n,probability"),
    ];
    for (i, (args, header)) in cases.iter().enumerate() {
        let csv = run_to(dir.path(), &format!("{i}.csv"), args);
        assert_eq!(csv.lines().next().unwrap(), *header);
        assert!(csv.lines().count() > 1);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (i, args) in [CAT, QIOPA, OFILTER].iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{i}.csv"), args);
        let b = run_to(dir.path(), &format!("b{i}.csv"), args);
        assert_eq!(a, b);
    }
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let file = run_to(dir.path(), "q.csv", QIOPA);
    let o = mqs(QIOPA);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), file);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("q.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "qiopa-vis");
    assert_eq!(meta["config"]["gains"], serde_json::json!([0.5, 0.8]));
}

#[test]
fn floats_use_shortest_round_trip_form() {
    let o = mqs(&["universal-curve", "--alpha", "3", "--phi", "1.5707963267948966", "--grid", "0.1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "0.1");
    assert_eq!(row[2], "3.0");
    assert_eq!(row[3], "1.5707963267948966");
    let x: f64 = row[0].parse().unwrap();
    assert_eq!(format!("{x:?}"), row[0]);
}

#[test]
fn config_file_is_read_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(&cfg, r#"{"family": "qiopa", "gains": [0.5, 0.8], "grid": [0.0, 0.2]}"#).unwrap();
    let from_file = run_to(dir.path(), "f.csv", &["qiopa-vis", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file, run_to(dir.path(), "g.csv", QIOPA));
    let overridden = run_to(dir.path(), "h.csv", &["qiopa-vis", "--config", cfg.to_str().unwrap(), "--gains", "0.5"]);
    assert_eq!(overridden.lines().count(), 3);
}

#[test]
fn diagnostics_emit_json() {
    let o = mqs(&[
        "diagnostics",
        "--family",
        "qiopa",
        "--gains",
        "0.6",
        "--grid-variable",
        "x",
        "--grid",
        "0,0.5,1,1.5,2,2.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["label"], "g=0.6");
    assert!(v[0]["report"]["end_slope"].is_number());
}

#[test]
fn failures_exit_nonzero_with_error_json() {
    let bad_grid = mqs(&["universal-curve", "--alpha", "2", "--phi", "1", "--grid", "1.5"]);
    assert_eq!(error_json(&bad_grid)["error"], "invalid_parameter");

    let budget = mqs(&["qiopa-vis", "--gains", "3", "--grid", "0.1"]);
    assert_eq!(error_json(&budget)["error"], "photon_budget_exceeded");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"grid": [0.1], "unknown_field": true}"#).unwrap();
    let unknown = mqs(&["cat-dist", "--config", cfg.to_str().unwrap()]);
    assert_eq!(error_json(&unknown)["error"], "json");

    let missing = mqs(&["cat-dist", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(error_json(&missing)["error"], "io");

    let usage = mqs(&["no-such-command"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(error_json(&usage)["error"], "usage");
    assert!(error_json(&usage)["message"].is_string());
}
