use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn agmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agmi"))
        .args(args)
        .output()
        .unwrap()
}

fn problem(name: &str) -> String {
    format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn json(args: &[&str]) -> Value {
    let out = agmi(&[&["--json"], args].concat());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("agmi-commands-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn group_info_lists_rings() {
    let out = agmi(&["group-info", "4,3,9,9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("{(2,2,1),(3,1,1),(3,2,1),(3,2,2)}"), "{text}");
    let v = json(&["group-info", "6"]);
    assert_eq!(v["canonical_form"], "Z_2⊕Z_3");
    assert_eq!(v["order"], 6);
}

#[test]
fn capacity_examples() {
    for (file, want) in [
        ("z4_identity.json", 2.0),
        ("z4_merged_pair.json", 1.0),
        ("z2_bsc0.json", 1.0),
    ] {
        let v = json(&["capacity", &problem(file)]);
        assert!(
            (v["rate"].as_f64().unwrap() - want).abs() < 1e-9,
            "{file}: {v}"
        );
        let exact = json(&["capacity", &problem(file), "--exact"]);
        assert_eq!(v["rate"], exact["rate"], "{file}");
    }
}

#[test]
fn closed_form_and_grid_cross_checks() {
    let v = json(&[
        "capacity",
        &problem("z2_z4_channel.json"),
        "--closed-form",
        "--grid-check",
        "0.02",
    ]);
    assert!(v["closed_form"]["difference"].as_f64().unwrap().abs() < 1e-8);
    assert!(v["grid_check"]["gap"].as_f64().unwrap() >= -1e-9);
    let v = json(&["rd", &problem("z4_source.json"), "--closed-form"]);
    assert!(v["closed_form"]["difference"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn text_and_json_agree() {
    let v = json(&["rd", &problem("z4_source.json")]);
    let text = String::from_utf8(agmi(&["rd", &problem("z4_source.json")]).stdout).unwrap();
    assert!(
        text.contains(&format!("{:.9}", v["rate"].as_f64().unwrap())),
        "{text}"
    );
}

#[test]
fn nats_scale_bits() {
    let bits = json(&["capacity", &problem("z2_z4_channel.json")])["rate"]
        .as_f64()
        .unwrap();
    let nats = json(&["capacity", &problem("z2_z4_channel.json"), "--nats"])["rate"]
        .as_f64()
        .unwrap();
    assert!((nats - bits * std::f64::consts::LN_2).abs() < 2e-9);
}

#[test]
fn theta_table_for_z8() {
    let out = agmi(&[
        "theta-table",
        "8",
        "--support",
        "(2,2),(2,3)",
        "--weights",
        "0,0.5,0.5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("theta=")).collect();
    assert_eq!(rows.len(), 4, "{text}");
    assert!(
        rows[1].ends_with("0.200000000") && rows[2].ends_with("0.600000000"),
        "{text}"
    );
}

#[test]
fn csv_has_the_documented_columns() {
    let path = scratch("terms.csv", "");
    let out = agmi(&[
        "capacity",
        &problem("z2_z4_channel.json"),
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta_2_1,theta_2_2,omega,info_bits,ratio_bits"
    );
    assert!(lines.count() > 0);
}

#[test]
fn verify_ensemble_passes() {
    let v = json(&["verify-ensemble", "4", "--k", "0,1", "--n", "1"]);
    assert_eq!(v["passed"], true);
    let out = agmi(&["verify-ensemble", "2,4", "--k", "1,1", "--sampled", "500"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_reports_a_rate() {
    let v = json(&[
        "--seed",
        "3",
        "simulate",
        &problem("z4_identity.json"),
        "--k",
        "0,1",
        "--n",
        "2",
        "--trials",
        "200",
    ]);
    let r = v["error_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&r));
}

#[test]
fn validation_failures_exit_with_two() {
    let bad_rows = scratch(
        "bad_rows.json",
        r#"{"kind":"channel","group":[2],"output_size":2,"matrix":[[0.5,0.6],[1,0]]}"#,
    );
    let unknown = scratch(
        "unknown.json",
        r#"{"kind":"channel","group":[2],"output_size":2,"matrix":[[1,0],[0,1]],"extra":1}"#,
    );
    let wrong_kind = scratch(
        "wrong_kind.json",
        r#"{"kind":"channel","group":[2],"output_size":2,"matrix":[[1,0],[0,1]]}"#,
    );
    let cases: Vec<Vec<String>> = vec![
        vec!["group-info".into(), "1".into()],
        vec!["group-info".into(), "4,x".into()],
        vec!["capacity".into(), bad_rows.display().to_string()],
        vec!["capacity".into(), unknown.display().to_string()],
        vec!["rd".into(), wrong_kind.display().to_string()],
        vec!["capacity".into(), "/nonexistent/problem.json".into()],
        vec![
            "theta-table".into(),
            "8".into(),
            "--weights".into(),
            "0.5,0.5".into(),
        ],
        vec![
            "verify-ensemble".into(),
            "4".into(),
            "--k".into(),
            "0,0".into(),
        ],
        vec![
            "--tolerance".into(),
            "0".into(),
            "capacity".into(),
            problem("z2_bsc0.json"),
        ],
        vec!["bogus-command".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = agmi(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}
