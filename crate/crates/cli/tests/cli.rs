use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psl2q"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> (String, Value) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let s = stdout(&a);
    let v = serde_json::from_str(&s).unwrap();
    (s, v)
}

fn has_float(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_f64(),
        Value::Array(a) => a.iter().any(has_float),
        Value::Object(o) => o.values().any(has_float),
        _ => false,
    }
}

#[test]
fn json_round_trips_byte_identical() {
    let cmds: &[&[&str]] = &[
        &["classes", "--q", "9"],
        &["square", "--q", "7", "--class", "unip:sq"],
        &["square", "--q", "13", "--class", "unip:sq", "--closed-form"],
        &["traces", "--q", "25", "--n", "13"],
        &["table1"],
        &["gen-pair", "--q", "8", "--class", "ord:7"],
        &["gen-triple", "--q", "11", "--class", "ord:5"],
        &["factor", "--q", "7", "--elem", "1,6,1,0"],
        &["verify", "--q", "5"],
    ];
    for c in cmds {
        let (s, v) = json(c);
        let mut again = serde_json::to_string_pretty(&v).unwrap();
        again.push('\n');
        assert_eq!(s, again, "{c:?}");
        assert!(v.get("command").is_some() && v.get("q").is_some() && v.get("result").is_some());
        assert!(!has_float(&v), "{c:?}");
    }
}

#[test]
fn classes_listing() {
    let (_, v) = json(&["classes", "--q", "7"]);
    let classes = v["result"].as_array().unwrap();
    assert_eq!(classes.len(), 6);
    let total: u64 = classes.iter().map(|c| c["size"].as_u64().unwrap()).sum();
    assert_eq!(total, 168);
    assert_eq!(v["field"]["p"], 7);
}

#[test]
fn square_examples() {
    let (_, v) = json(&["square", "--q", "8", "--class", "ord:9"]);
    let kinds: Vec<&str> = v["result"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap())
        .collect();
    assert!(!kinds.contains(&"unipotent"));
    let (_, all) = json(&["classes", "--q", "8"]);
    assert_eq!(kinds.len() + 1, all["result"].as_array().unwrap().len());
    assert_eq!(v["result"]["total"], 7 * 63);

    let (_, brute) = json(&["square", "--q", "7", "--class", "unip:sq"]);
    let (_, closed) = json(&["square", "--q", "7", "--class", "unip:sq", "--closed-form"]);
    assert_eq!(brute["result"]["classes"], closed["result"]["classes"]);
    assert_eq!(brute["result"]["total"], 125);
}

#[test]
fn absence_is_not_an_error() {
    let out = run(&["gen-pair", "--q", "9", "--class", "unip:sq"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("absent") && text.contains("PSL2(9)"));
    let (_, v) = json(&["gen-triple", "--q", "7", "--class", "ord:2"]);
    assert_eq!(v["result"]["present"], false);
    assert!(v["result"]["reason"].is_string());
}

#[test]
fn malformed_input_exits_2() {
    let bad: &[&[&str]] = &[
        &["classes", "--q", "6"],
        &["square", "--q", "7", "--class", "tr:99"],
        &["square", "--q", "7", "--class", "ord:5"],
        &["factor", "--q", "7", "--elem", "1,2,3"],
        &["factor", "--q", "7", "--elem", "1,2,3,4"],
        &["gen-pair", "--q", "3", "--class", "unip:sq"],
        &["verify"],
        &["nonsense"],
    ];
    for args in bad {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = run(&["square", "--q", "7", "--class", "nope"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unip:nonsq"));
}

#[test]
fn seeds_reproduce_certificates() {
    for args in [
        ["gen-pair", "--q", "16", "--class", "ord:5", "--seed", "7"],
        ["factor", "--q", "9", "--elem", "1,1,0,1", "--seed", "3"],
    ] {
        assert_eq!(stdout(&args), stdout(&args));
    }
}

#[test]
fn out_flag_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classes.csv");
    let printed = stdout(&[
        "classes",
        "--q",
        "5",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(printed.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(written.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["selector", "kind", "representative", "order", "size"]
    );
    assert_eq!(rdr.records().count(), 5);
}

#[test]
fn table_rows_use_pipes() {
    let s = stdout(&["table1", "--qmax", "9"]);
    assert!(s.lines().any(|l| l == "9 | 3 | 5 | 4"));
    assert!(s.lines().any(|l| l == "2 | 2 | 3 | --"));
}
