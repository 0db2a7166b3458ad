use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SEVEN: &str = r#"{"mode":"integral","agents":[
 {"id":"A","preferences":["G","E","B"]},{"id":"B","preferences":["D","C"]},
 {"id":"C","preferences":["B","D"]},{"id":"D","preferences":["E"]},
 {"id":"E","preferences":["C","F"]},{"id":"F","preferences":["A"]},{"id":"G","preferences":["F"]}],
"arcs":[
 {"buyer":"A","seller":"G","capacity":1},{"buyer":"A","seller":"E","capacity":1},{"buyer":"A","seller":"B","capacity":1},
 {"buyer":"B","seller":"D","capacity":1},{"buyer":"B","seller":"C","capacity":1},
 {"buyer":"C","seller":"B","capacity":1},{"buyer":"C","seller":"D","capacity":1},
 {"buyer":"D","seller":"E","capacity":1},{"buyer":"E","seller":"C","capacity":1},
 {"buyer":"E","seller":"F","capacity":1},{"buyer":"F","seller":"A","capacity":2},{"buyer":"G","seller":"F","capacity":1}]}"#;

const C0: &str = r#"{"cycles":[{"agents":["A","B","C","D","E","F"],"flow":1},{"agents":["A","G","F"],"flow":1}]}"#;

struct Dir(TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(TempDir::new().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn balex(args: &[&str], files: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_balex"));
    cmd.args(args);
    for f in files {
        cmd.arg(f);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn cycle_set(v: &Value) -> Vec<(Vec<String>, String)> {
    let mut cs: Vec<_> = v["cycles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let agents = c["agents"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
            (agents, c["flow"].as_str().unwrap().to_string())
        })
        .collect();
    cs.sort();
    cs
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn ttc_on_seven_agents() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let out = balex(&["--json", "ttc", "--trace"], &[&inst]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        cycle_set(&v),
        vec![
            (names(&["A", "E", "F"]), "1".to_string()),
            (names(&["A", "G", "F"]), "1".to_string()),
            (names(&["B", "D", "E", "C"]), "1".to_string()),
        ]
    );
    assert_eq!(v["weight"], "10");
    assert_eq!(v["trace"]["rounds"].as_array().unwrap().len(), 2);
}

#[test]
fn check_reports_trade_in_and_coalition() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let x = d.file("x.json", C0);
    let out = balex(&["--json", "check"], &[&inst, &x]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["pareto_optimal"], false);
    assert_eq!(v["maximal"], true);
    assert_eq!(v["trade_in"]["exchange_arcs"], serde_json::json!([["A", "B"]]));
    assert_eq!(v["trade_in"]["paths"], serde_json::json!([["A", "E", "C", "B"]]));
    assert_eq!(v["coalition"]["exchange_arcs"], serde_json::json!([["A", "B"], ["B", "C"], ["C", "D"]]));
}

#[test]
fn improve_output_is_optimal_and_reparses() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let x = d.file("x.json", C0);
    let out = balex(&["--json", "improve"], &[&inst, &x]);
    assert_eq!(out.status.code(), Some(0));
    let improved = d.file("y.json", &String::from_utf8(out.stdout).unwrap());
    let out = balex(&["check"], &[&inst, &improved]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(balex(&["verify"], &[&inst, &improved]).status.code(), Some(0));
}

#[test]
fn verify_exit_codes() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let empty = d.file("e.json", r#"{"cycles":[]}"#);
    assert_eq!(balex(&["verify"], &[&inst, &empty]).status.code(), Some(0));
    let over = d.file("o.json", r#"{"cycles":[{"agents":["B","C"],"flow":2}]}"#);
    let out = balex(&["--json", "verify"], &[&inst, &over]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["valid"], false);
    let unknown = d.file("u.json", r#"{"cycles":[{"agents":["B","G"],"flow":1}]}"#);
    assert_eq!(balex(&["verify"], &[&inst, &unknown]).status.code(), Some(3));
}

#[test]
fn error_exit_codes() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let bad = d.file("bad.json", r#"{"agents":[{"id":"A","preferences":["Z"]}],"arcs":[]}"#);
    let out = balex(&["check"], &[&bad, &inst]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("agents[0].preferences[0]"));
    assert_eq!(balex(&["ttc"], &[Path::new("/definitely/missing.json")]).status.code(), Some(1));
    let tiny = ["oracle", "--max-agents", "3"];
    assert_eq!(balex(&tiny, &[&inst]).status.code(), Some(4));
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let args = ["--json", "gen", "--agents", "7", "--seed", "11", "--weights", "concordant"];
    let a = balex(&args, &[]);
    let b = balex(&args, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let d = Dir::new();
    let inst = d.file("g.json", &String::from_utf8(a.stdout).unwrap());
    let out = balex(&["--json", "concordant"], &[&inst]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["weight"], v["optimum"]);
}

#[test]
fn maxweight_certificate() {
    let d = Dir::new();
    let inst = d.file("i.json", SEVEN);
    let out = balex(&["--json", "maxweight", "--dual-cert"], &[&inst]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["objective"], "11");
    assert_eq!(v["duality"]["status"], "ok");
    let mw = d.file("mw.json", &serde_json::to_string(&v).unwrap());
    assert_eq!(balex(&["verify"], &[&inst, &mw]).status.code(), Some(0));
}

#[test]
fn non_concordant_exits_two() {
    let d = Dir::new();
    let kite = d.file(
        "k.json",
        r#"{"mode":"integral","agents":[
          {"id":"A","preferences":["B","D"]},{"id":"B","preferences":["C"]},
          {"id":"C","preferences":["A"]},{"id":"D","preferences":["C"]}],
        "arcs":[{"buyer":"A","seller":"B","capacity":1},{"buyer":"A","seller":"D","capacity":1,"weight":2},
          {"buyer":"B","seller":"C","capacity":1},{"buyer":"C","seller":"A","capacity":1},
          {"buyer":"D","seller":"C","capacity":1}]}"#,
    );
    let out = balex(&["--json", "concordant"], &[&kite]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["concordance"]["verdict"]["agent"], "A");
}

#[test]
fn agent_capacity_is_respected() {
    let d = Dir::new();
    // B may take part in only one unit of exchange although both cycles through it fit
    let inst = d.file(
        "cap.json",
        r#"{"mode":"integral","agents":[
          {"id":"A","preferences":["B"]},{"id":"B","preferences":["A","C"],"capacity":1},{"id":"C","preferences":["B"]}],
        "arcs":[{"buyer":"A","seller":"B","capacity":1},{"buyer":"B","seller":"A","capacity":1},
          {"buyer":"B","seller":"C","capacity":1},{"buyer":"C","seller":"B","capacity":1}]}"#,
    );
    let out = balex(&["--json", "ttc"], &[&inst]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(cycle_set(&v), vec![(names(&["A", "B"]), "1".to_string())]);
}
