use std::path::PathBuf;
use std::process::{Command, Output};

fn models(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).display().to_string()
}

fn pidl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pidl")).args(args).env_remove("PIDL_PORT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_example4_is_clean() {
    let o = pidl(&["check", &models("example4.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("states: 3, inconsistent: 0"));
}

#[test]
fn check_steelplant_finds_anomalies() {
    let o = pidl(&["check", &models("steelplant.json")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("states: 123, inconsistent: 28\n"));
    for line in ["redundancy: 14", "cycle: 8", "user_confluence: 1", "asset_conflict: 3", "incompleteness: 4"] {
        assert!(text.lines().any(|l| l == line), "{line}");
    }
}

#[test]
fn check_json_report() {
    let o = pidl(&["check", "--format", "json", &models("steelplant.json")]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["version"], 1);
    assert_eq!(v["states"], 123);
    assert_eq!(v["counts"]["asset_conflict"], 3);
    assert_eq!(v["findings"].as_array().unwrap().len(), 59);
    assert_eq!(v["findings"][0]["class"], "inconsistency");
}

#[test]
fn input_and_usage_errors_exit_2() {
    let o = pidl(&["check", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    assert_eq!(pidl(&["check", "--format", "dot", &models("example4.json")]).status.code(), Some(2));
    assert_eq!(pidl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pidl(&["check", "--time-limit", "0", &models("example4.json")]).status.code(), Some(2));
    assert_eq!(pidl(&["gen", "--vars", "3"]).status.code(), Some(2));
    assert_eq!(pidl(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_model_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"decisions\": [\n  {\"name\": \"a\", \"type\": \"boolean\",}\n]}").unwrap();
    let o = pidl(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn graph_exports() {
    let dot = stdout(&pidl(&["graph", &models("example4.json")]));
    assert_eq!(dot.matches("[label=\"").count() - dot.matches(" -> ").count(), 3);
    let flip = stdout(&pidl(&["graph", &models("flipflop.json")]));
    assert_eq!(flip.matches(" -> ").count(), 2);
    let o = pidl(&["graph", "--format", "json", &models("example4.json")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 3);
    assert!(v["anomalies"].is_object());
}

#[test]
fn gen_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = pidl(&["gen", "--vars", "20", "--count", "20", "--seed", "3", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().count(), 20);
    }
    for i in 1..=20 {
        let name = format!("rnd_{i}.json");
        let x = std::fs::read_to_string(a.join(&name)).unwrap();
        assert_eq!(x, std::fs::read_to_string(b.join(&name)).unwrap());
        let v: serde_json::Value = serde_json::from_str(&x).unwrap();
        assert_eq!(v["rules"].as_array().unwrap().len(), 30);
        assert_eq!(v["constraints"].as_array().unwrap().len(), 20);
    }
}

#[test]
fn bench_table() {
    let o = pidl(&["bench", "--vars", "20", "--count", "20", "--no-timings"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22);
    assert!(lines[0].starts_with("model"));
    for row in &lines[1..21] {
        let result = row.rsplit(' ').next().unwrap();
        let triple = result.split('/').collect::<Vec<_>>();
        assert!(
            result == "inconsistent" || (triple.len() == 3 && (triple[1] == "Y" || triple[1] == "N")),
            "{row}"
        );
        assert!(row.contains(" - "), "{row}");
    }
    assert!(lines[21].starts_with("summary: 20 models, "));
}

#[test]
fn bench_timeout_rows_continue() {
    let o = pidl(&["bench", "--vars", "100", "--count", "2", "--time-limit", "0.000001"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with("timeout")).count(), 2, "{text}");
    assert!(text.contains("2 timeouts"));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.txt");
    let o = pidl(&["check", &models("example4.json"), "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(file).unwrap().starts_with("states: 3, inconsistent: 0"));
}
