use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn prepost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prepost")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = prepost(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn temp_config(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("prepost-{}-{name}.toml", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

fn first_record(doc: &Value) -> &serde_json::Map<String, Value> {
    doc["records"][0].as_object().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&prepost(&["parallel", "-n", "2"])), 0);
    for bad in [
        &["parallel", "-n", "0"][..],
        &["parallel", "-n", "13"],
        &["antiparallel", "-n", "3"],
        &["antiparallel", "-n", "10"],
        &["use", "--alpha-sq", "0.3"],
        &["use", "--eps", "1.5"],
        &["duality-suite", "--instances", "0"],
        &["game", "--bundled", "no-such-config"],
        &["no-such-command"],
        &["parallel"],
    ] {
        let o = prepost(bad);
        assert_eq!(code(&o), 2, "{bad:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = prepost(&["duality-suite", "--inject-fault"]);
    assert_eq!(code(&o), 3);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["passed"], false);
    assert_eq!(code(&prepost(&["parallel", "-n", "3", "--quadrature-order", "2"])), 3);
}

#[test]
fn retry_exhaustion_is_a_runtime_failure_with_the_parameter() {
    let path = temp_config(
        "reject",
        "scenario = \"fixed-post\"\nmax_retries = 50\n[problem]\nkind = \"states\"\npriors = [1.0]\npre = [[1, 0]]\nmerit = [[1]]\n[instrument]\nkind = \"povm\"\nmode = \"subnormalized\"\nelements = [[[0, 0], [0, 1]]]\n",
    );
    let o = prepost(&["game", "--config", path.to_str().unwrap(), "--trials", "10"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains('0'), "{}", stderr(&o));
}

#[test]
fn help_documents_defaults_and_exit_codes() {
    let o = prepost(&["--help"]);
    assert!(stdout(&o).contains("Exit status"));
    let o = prepost(&["use", "--help"]);
    let text = stdout(&o);
    assert!(text.contains("default: 0.8") && text.contains("100000"), "{text}");
}

#[test]
fn config_errors_report_lines() {
    let path = temp_config("syntax", "scenario = \"pre-only\"\n\n[problem]\nkind = \"states\"\npriors = [0.5, 0.5\n");
    let o = prepost(&["game", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let path = temp_config(
        "semantic",
        "scenario = \"pre-only\"\n\n[problem]\nkind = \"states\"\npriors = [0.5, 0.5]\npre = [[1, 0], [0, 1]]\nmerit = [[1, 0], [0, 1]]\n\n[instrument]\nkind = \"povm\"\nmode = \"exact\"\nelements = [[[1, 0], [0, 0]]]\n",
    );
    let o = prepost(&["game", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 9"), "{}", stderr(&o));

    let path = temp_config(
        "estimator",
        "scenario = \"pre-only\"\nestimator = [0, 5]\n[problem]\nkind = \"states\"\npriors = [0.5, 0.5]\npre = [[1, 0], [0, 1]]\nmerit = [[1, 0], [0, 1]]\n[instrument]\nkind = \"computational-basis\"\n",
    );
    let o = prepost(&["game", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn literal_configs_with_estimators_run() {
    // guess the opposite state: merit zero
    let path = temp_config(
        "swap",
        "scenario = \"pre-only\"\ntrials = 500\nestimator = [1, 0]\n[problem]\nkind = \"states\"\npriors = [0.5, 0.5]\npre = [[1, 0], [0, 1]]\nmerit = [[1, 0], [0, 1]]\n[instrument]\nkind = \"computational-basis\"\n",
    );
    let doc = json(&["game", "--config", path.to_str().unwrap()]);
    assert_eq!(first_record(&doc)["empirical_merit"], 0.0);
    assert_eq!(first_record(&doc)["analytic_merit"], 0.0);
}

#[test]
fn bundled_games() {
    let doc = json(&["game", "--bundled", "orthogonal-pair"]);
    let r = first_record(&doc);
    assert_eq!(r["empirical_merit"], 1.0);
    assert_eq!(r["analytic_merit"], 1.0);
    assert_eq!(doc["manifest"]["params"]["resolved"]["trials"], 100_000);
    for name in ["use-eps0.1", "parallel-N1"] {
        let doc = json(&["game", "--bundled", name, "--trials", "20000"]);
        assert_eq!(doc["passed"], true, "{name}");
    }
}

#[test]
fn runs_are_deterministic() {
    let args = ["game", "--bundled", "use-eps0.1", "--trials", "5000", "--seed", "11"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["records"], b["records"]);
    let mut m = a["manifest"].clone();
    m["duration_ms"] = b["manifest"]["duration_ms"].clone();
    assert_eq!(m, b["manifest"]);
    let c = json(&["game", "--bundled", "use-eps0.1", "--trials", "5000", "--seed", "12"]);
    assert_ne!(first_record(&a)["retry_histogram"], first_record(&c)["retry_histogram"]);

    let a = json(&["use", "--trials", "3000", "--seed", "5"]);
    let b = json(&["use", "--trials", "3000", "--seed", "5"]);
    assert_eq!(a["records"], b["records"]);
}

fn csv_agrees_with_json(args: &[&str]) {
    let doc = json(args);
    let mut with_csv = args.to_vec();
    with_csv.extend(["--out", "csv"]);
    let o = prepost(&with_csv);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let (first, body) = text.split_once('\n').unwrap();
    let header: Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["schema"], doc["schema"]);
    assert_eq!(header["passed"], doc["passed"]);
    assert_eq!(header["manifest"]["params"], doc["manifest"]["params"]);

    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let columns: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let json_columns: Vec<String> = serde_json::from_value(doc["columns"].clone()).unwrap();
    assert_eq!(columns, json_columns);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let records = doc["records"].as_array().unwrap();
    assert_eq!(rows.len(), records.len());
    for (row, rec) in rows.iter().zip(records) {
        for (col, cell) in columns.iter().zip(row.iter()) {
            let v = &rec[col];
            match v {
                Value::Null => assert_eq!(cell, "", "{col}"),
                Value::String(s) => assert_eq!(cell, s, "{col}"),
                Value::Number(n) => {
                    assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{col}")
                }
                Value::Bool(b) => assert_eq!(cell, b.to_string(), "{col}"),
                other => panic!("non-scalar cell {other}"),
            }
        }
    }
}

#[test]
fn csv_and_json_agree() {
    csv_agrees_with_json(&["parallel", "-n", "3"]);
    csv_agrees_with_json(&["antiparallel", "-n", "2"]);
    csv_agrees_with_json(&["use", "--trials", "2000", "--eps", "0,0.1,0.7071067811865476"]);
    csv_agrees_with_json(&["duality-suite", "--instances", "20"]);
    csv_agrees_with_json(&["game", "--bundled", "use-eps0.1", "--trials", "3000", "--seed", "4"]);
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/result-v1.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn documents() -> Vec<Value> {
    vec![
        json(&["parallel", "-n", "1"]),
        json(&["antiparallel", "-n", "2"]),
        json(&["use", "--trials", "500"]),
        json(&["duality-suite", "--instances", "5"]),
        json(&["game", "--bundled", "orthogonal-pair", "--trials", "100"]),
    ]
}

#[test]
fn documents_match_the_schema_structure() {
    let s = schema();
    for doc in documents() {
        let obj = doc.as_object().unwrap();
        let required: Vec<&str> = s["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut req = required.clone();
        req.sort_unstable();
        assert_eq!(keys, req);
        assert_eq!(doc["schema"], s["properties"]["schema"]["const"]);
        let commands = s["properties"]["manifest"]["properties"]["command"]["enum"].as_array().unwrap();
        assert!(commands.contains(&doc["manifest"]["command"]));
        let columns = doc["columns"].as_array().unwrap();
        for rec in doc["records"].as_array().unwrap() {
            let rec = rec.as_object().unwrap();
            assert_eq!(rec.len(), columns.len());
            assert!(rec.values().all(|v| !v.is_array() && !v.is_object()));
        }
    }
}

#[test]
fn documents_validate_against_the_schema() {
    let probe = Command::new("python3").args(["-c", "import jsonschema"]).output();
    if !probe.map(|o| o.status.success()).unwrap_or(false) {
        eprintln!("python jsonschema unavailable; structural check only");
        return;
    }
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/result-v1.schema.json");
    for (i, doc) in documents().into_iter().enumerate() {
        let path = std::env::temp_dir().join(format!("prepost-{}-doc{i}.json", std::process::id()));
        std::fs::write(&path, doc.to_string()).unwrap();
        let script = "import json, sys, jsonschema\n\
                      s = json.load(open(sys.argv[1])); d = json.load(open(sys.argv[2]))\n\
                      jsonschema.Draft202012Validator.check_schema(s)\n\
                      jsonschema.Draft202012Validator(s).validate(d)\n";
        let o = Command::new("python3").args(["-c", script, schema_path, path.to_str().unwrap()]).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn antiparallel_outside_the_reference_set_warns() {
    let o = prepost(&["antiparallel", "-n", "8", "--quadrature-order", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!doc["warnings"].as_array().unwrap().is_empty());
    assert!(first_record(&doc)["reference"].is_null());
}
