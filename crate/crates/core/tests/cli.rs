//! The command-line tool end to end: exit codes, report files, schemas,
//! seeds, plot tables and byte-for-byte reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use circle_ifs::report::{parse_real, report_schema, summary_schema};
use circle_ifs::scenario::Analysis;
use serde_json::Value;
use tempfile::TempDir;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circle-ifs")).args(args).output().expect("binary runs")
}

fn analyze(scenario: &str, out: &Path, extra: &[&str]) -> Output {
    let path = scenarios().join(scenario);
    let mut args = vec!["analyze", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validate(schema: &Value, doc: &Value) {
    let v = jsonschema::validator_for(schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).take(5).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn analyze_writes_one_valid_report_per_analysis() {
    let dir = TempDir::new().unwrap();
    let out = analyze("ss_pair.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for a in Analysis::DEFAULT {
        let doc = read(&dir.path().join(a.file_name()));
        validate(&report_schema(a), &doc);
        assert_eq!(doc["seed"], "7");
        assert_eq!(doc["scenario"], "ss_pair");
    }
    let summary = read(&dir.path().join("summary.json"));
    validate(&summary_schema(), &summary);
    assert_eq!(summary["result"]["exit_code"], 0);
    assert_eq!(summary["result"]["headline"]["minimality"], "not_minimal");
    assert_eq!(summary["result"]["headline"]["star_intervals"]["ss"], 1);
    // The scenario's decimal strings are echoed verbatim.
    assert_eq!(summary["result"]["scenario_echo"]["maps"][1]["params"]["phase"]["text"], "0.25");
}

#[test]
fn common_fixed_point_exits_with_hypothesis_code() {
    let dir = TempDir::new().unwrap();
    let out = analyze("common_fixed_point.toml", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("share the fixed point"));
    let summary = read(&dir.path().join("summary.json"));
    validate(&summary_schema(), &summary);
    assert_eq!(summary["result"]["error"]["kind"], "CommonFixedPoint");
    assert_eq!(summary["result"]["analyses"][0]["status"], "failed");
    assert_eq!(summary["result"]["analyses"][1]["status"], "skipped");
}

#[test]
fn invalid_scenarios_exit_with_input_code_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[maps.f0]\nfamily = \"perturbed_rotation\"\nparams = { alpha = 0.1, beta = \"0.05\" }\n").unwrap();
    let out = run(&["analyze", "--scenario", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("maps.f0.params.alpha") && err.contains("maps.f1: missing"), "{err}");
    let missing = run(&["analyze", "--scenario", "/nonexistent/x.toml"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn seed_flag_overrides_and_is_recorded() {
    let dir = TempDir::new().unwrap();
    let out = analyze("half_rotation.toml", dir.path(), &["--seed", "18446744073709551615"]);
    assert!(out.status.success());
    for f in ["classify.json", "decompose.json", "certify.json", "summary.json"] {
        assert_eq!(read(&dir.path().join(f))["seed"], "18446744073709551615");
    }
    let c = read(&dir.path().join("classify.json"));
    assert_eq!(c["result"]["maps"][0]["power"], 2);
    assert_eq!(c["result"]["maps"][0]["shift"], 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (scenario, threads) in [("ss_pair.toml", "1"), ("four_cycle.json", "2"), ("line_pair.toml", "1")] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert!(analyze(scenario, a.path(), &[]).status.success());
        let out = Command::new(env!("CARGO_BIN_EXE_circle-ifs"))
            .env("CIRCLE_IFS_THREADS", threads)
            .args(["analyze", "--scenario", scenarios().join(scenario).to_str().unwrap(), "--out", b.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 4);
        for n in names {
            let (x, y) = (std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap());
            assert!(x == y, "{scenario}: {n:?} differs between runs");
        }
    }
}

#[test]
fn json_schema_flag_prints_every_schema() {
    let out = run(&["--json-schema"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for a in Analysis::ALL {
        assert_eq!(v[a.file_name()], report_schema(a));
    }
    let out = run(&["decompose", "--json-schema"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["classify.json", "decompose.json", "summary.json"]);
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn plot_tables_follow_their_reports() {
    let dir = TempDir::new().unwrap();
    assert!(analyze("ss_pair.toml", dir.path(), &[]).status.success());
    let out = run(&["plot-data", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // One diagram row per decomposition piece.
    let dec = read(&dir.path().join("decompose.json"));
    let (h, rows) = csv_rows(&dir.path().join("interval_diagram.csv"));
    assert_eq!(h, ["kind", "a", "b", "witnessed"]);
    assert_eq!(rows.len(), dec["result"]["pieces"].as_array().unwrap().len());
    assert!(rows.iter().any(|r| r[0] == "ss" && r[1] == "0.5" && r[2] == "0.75"));

    // The histogram conserves the orbit budget.
    let (h, rows) = csv_rows(&dir.path().join("orbit_histogram.csv"));
    assert_eq!(h, ["direction", "bin", "lo", "hi", "count"]);
    for dir_name in ["forward", "backward"] {
        let total: u64 = rows.iter().filter(|r| r[0] == dir_name).map(|r| r[4].parse::<u64>().unwrap()).sum();
        assert_eq!(total, 1_000_000);
    }

    // Certified atlases expand: DR^N > 1 along the whole profile.
    let (h, rows) = csv_rows(&dir.path().join("derivative_profile.csv"));
    assert_eq!(h, ["atlas", "x", "dr", "dr_n"]);
    assert!(!rows.is_empty());
    for r in &rows {
        let dr_n = parse_real(&r[3]).expect("every atlas of this scenario is certified");
        assert!(dr_n > 1.0, "{r:?}");
    }
}

#[test]
fn plot_data_without_the_report_is_a_missing_section() {
    let dir = TempDir::new().unwrap();
    assert!(analyze("half_rotation.toml", dir.path(), &[]).status.success());
    let out = run(&["plot-data", "--out", dir.path().to_str().unwrap(), "--kind", "derivative_profile"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("derivative_profile"));
    let empty = TempDir::new().unwrap();
    assert_eq!(run(&["plot-data", "--out", empty.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn line_scenarios_run_end_to_end() {
    let dir = TempDir::new().unwrap();
    let out = analyze("line_pair.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = read(&dir.path().join("classify.json"));
    let kinds: Vec<&str> = c["result"]["star_intervals"].as_array().unwrap().iter().map(|k| k["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["ss"]);
    let orbit = read(&dir.path().join("orbit.json"));
    let f = &orbit["result"]["forward"];
    let total: u64 = f["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>() + f["outside"].as_u64().unwrap();
    assert_eq!(total, f["steps"].as_u64().unwrap());
}
