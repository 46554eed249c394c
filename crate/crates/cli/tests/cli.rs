use std::fs;
use std::path::Path;

use clap::Parser;
use expost_cli::{main_with_args, run_command, Cli, Outcome, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use serde_json::Value;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("expost").chain(list.iter().copied()).map(String::from).collect()
}

fn run(list: &[&str]) -> Outcome {
    let cli = Cli::try_parse_from(args(list)).expect("arguments parse");
    run_command(&cli.command).expect("command succeeds")
}

fn exit(list: &[&str]) -> i32 {
    main_with_args(args(list))
}

fn text(outcome: &Outcome) -> &str {
    &outcome.emitted[0].text
}

fn header_fields(report: &str) -> Vec<(String, String)> {
    let first = report.lines().next().expect("header line");
    first
        .trim_start_matches("# ")
        .split(' ')
        .map(|kv| {
            let (k, v) = kv.split_once('=').expect("key=value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn solve_ticket_attends_above_threshold() {
    let out = run(&["solve", "--scenario", "builtin:example1_ticket", "--gamma", "0.2"]);
    assert!(out.violations.is_empty());
    let report = text(&out);
    let row = report.lines().find(|l| l.contains(",snowstorm,buy,")).expect("snowstorm row");
    assert!(row.contains(",attend,"), "{row}");
    let out = run(&["solve", "--scenario", "builtin:example1_ticket", "--gamma", "0.1"]);
    let row = text(&out).lines().find(|l| l.contains(",snowstorm,buy,")).unwrap().to_string();
    assert!(row.contains(",stay_home,"), "{row}");
}

#[test]
fn report_header_carries_provenance() {
    let out = run(&["solve", "--scenario", "builtin:example4_discount", "--gamma", "0.6", "--seed", "9"]);
    let fields = header_fields(text(&out));
    assert_eq!(fields[0], ("subcommand".into(), "solve".into()));
    assert_eq!(fields[1], ("seed".into(), "9".into()));
    assert_eq!(fields[2].0, "config_hash");
    assert_eq!(fields[2].1.len(), 64);
    assert!(fields[2].1.chars().all(|c| c.is_ascii_hexdigit()));
    // A different gamma is a different effective configuration.
    let other = run(&["solve", "--scenario", "builtin:example4_discount", "--gamma", "0.4", "--seed", "9"]);
    assert_ne!(header_fields(text(&other))[2], fields[2]);
}

#[test]
fn json_reports_are_objects_with_provenance() {
    let out = run(&["golden", "--format", "json"]);
    let v: Value = serde_json::from_str(text(&out)).unwrap();
    assert_eq!(v["subcommand"], "golden");
    assert_eq!(v["seed"], 0);
    assert!(v["config_hash"].as_str().unwrap().len() == 64);
    assert_eq!(v["columns"][0], "case");
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r[4] == "pass"));
}

#[test]
fn golden_suite_passes() {
    assert!(expost_cli::golden_suite().iter().all(|r| r.pass));
    assert_eq!(exit(&["golden", "--out", tempfile::tempdir().unwrap().path().join("g.csv").to_str().unwrap()]), EXIT_OK);
}

#[test]
fn malformed_inputs_exit_with_input_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"states\": [").unwrap();
    let bad = bad.to_str().unwrap();
    assert_eq!(exit(&["solve", "--scenario", bad]), EXIT_INPUT);
    assert_eq!(exit(&["solve", "--scenario", "builtin:nonexistent"]), EXIT_INPUT);
    assert_eq!(exit(&["sticky", "--gamma", "0.5", "--config", bad]), EXIT_INPUT);
    assert_eq!(exit(&["tariff", "--gamma", "0.5", "--dist", "lognormal"]), EXIT_INPUT);
    assert_eq!(exit(&["tariff", "--gamma", "1.5"]), EXIT_INPUT);
    assert_eq!(exit(&["propcheck", "--sizes", "c3xq2"]), EXIT_INPUT);
    assert_eq!(exit(&["identify"]), EXIT_INPUT);
    assert_eq!(exit(&["project", "--gamma", "0.5", "--a1", "0.123456"]), EXIT_INPUT);
    assert_eq!(exit(&["no-such-command"]), EXIT_INPUT);
    assert_eq!(exit(&["solve", "--gamma", "x"]), EXIT_INPUT);
}

#[test]
fn unknown_manifest_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"{"subcommand": "golden", "seed": 1, "bogus": true}"#).unwrap();
    assert_eq!(exit(&["run", "--manifest", path.to_str().unwrap()]), EXIT_INPUT);
    fs::write(&path, r#"{"subcommand": "golden"}"#).unwrap();
    assert_eq!(exit(&["run", "--manifest", path.to_str().unwrap()]), EXIT_INPUT);
    fs::write(&path, r#"{"subcommand": "run", "seed": 1}"#).unwrap();
    assert_eq!(exit(&["run", "--manifest", path.to_str().unwrap()]), EXIT_INPUT);
}

#[test]
fn corrupted_instance_exits_with_violation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let code = exit(&["propcheck", "--seeds", "20", "--inject-corrupt", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_VIOLATION);
    let report = fs::read_to_string(&out).unwrap();
    let row = report.lines().find(|l| l.starts_with("corrupt-0,")).expect("corrupt row");
    assert!(row.contains("hypothesis_violation"));
    assert!(row.contains("increasing differences"), "{row}");
    assert_eq!(exit(&["propcheck", "--seeds", "20", "--out", out.to_str().unwrap()]), EXIT_OK);
}

#[test]
fn propcheck_fixed_sizes_and_counts() {
    let out = run(&["propcheck", "--seeds", "30", "--sizes", "c3xg2x3xt4xs2", "--construction", "products"]);
    assert!(out.violations.is_empty());
    let report = text(&out);
    assert!(report.lines().any(|l| l == "# instances=30"));
    assert!(report.lines().filter(|l| l.contains(",c3xg2x3xt4xs2,")).count() == 30 * 3 * 2);
    assert!(report.lines().any(|l| l.starts_with("# violated=0")));
}

#[test]
fn tariff_writes_solution_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let out = run(&["tariff", "--gamma", "0.5", "--consumer", "soph", "--curve", curve.to_str().unwrap(), "--curve-points", "11"]);
    let v: Value = serde_json::from_str(text(&out)).unwrap();
    assert!((v["price_to_cost"].as_f64().unwrap() - 1.0859).abs() < 1e-3);
    let curve_text = &out.emitted[1].text;
    assert_eq!(out.emitted[1].path.as_deref(), Some(curve.as_path()));
    let body: Vec<&str> = curve_text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "s,q_classical,q_rationalizing,theta_adopted");
    assert_eq!(body.len(), 12);
}

#[test]
fn applications_run_with_defaults() {
    let project = run(&["project", "--gamma", "0.5"]);
    assert!(project.violations.is_empty());
    let sticky = run(&["sticky", "--gamma", "0.5"]);
    assert!(sticky.violations.is_empty());
    let elicit = run(&["elicit", "--gamma", "0.5", "--runs", "200", "--seed", "3"]);
    assert!(elicit.violations.is_empty());
    assert!(text(&elicit).lines().any(|l| l == "# sandwich_fails=0"));
}

#[test]
fn help_lists_every_subcommand() {
    let err = Cli::try_parse_from(["expost", "--help"]).unwrap_err();
    let help = err.to_string();
    for sub in ["solve", "propcheck", "identify", "tariff", "project", "sticky", "elicit", "golden", "run"] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
    assert_eq!(exit(&["--help"]), EXIT_OK);
}

fn write_manifest(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn manifest_runs_match_direct_invocation() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "m.json",
        r#"{"subcommand": "solve", "config": "builtin:example1_ticket", "seed": 4,
            "params": {"gamma": 0.2}, "outputs": {"out": "out/report.csv"}}"#,
    );
    assert_eq!(exit(&["run", "--manifest", m.to_str().unwrap()]), EXIT_OK);
    let via_manifest = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let direct = run(&["solve", "--scenario", "builtin:example1_ticket", "--gamma", "0.2", "--seed", "4"]);
    assert_eq!(via_manifest, text(&direct));
}

#[test]
fn reruns_are_byte_identical() {
    let cases: [&[&str]; 8] = [
        &["solve", "--scenario", "builtin:two_by_two", "--gamma", "0.5"],
        &["propcheck", "--seeds", "40", "--seed", "100"],
        &["identify", "--rep", "id-small-1", "--samples", "40", "--seed", "2"],
        &["tariff", "--gamma", "0.3", "--dist", "power:2", "--consumer", "naif"],
        &["project", "--gamma", "0.4"],
        &["sticky", "--gamma", "0.4"],
        &["elicit", "--gamma", "0.4", "--runs", "50", "--seed", "8"],
        &["golden", "--seed", "5"],
    ];
    for case in cases {
        let a = run(case);
        let b = run(case);
        assert_eq!(a.emitted.len(), b.emitted.len());
        for (x, y) in a.emitted.iter().zip(&b.emitted) {
            assert_eq!(x.text, y.text, "{case:?}");
        }
    }
}
