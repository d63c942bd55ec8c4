use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ONE: &str = "MOSWACP v1\nN 1\nK 1\nQ 4\nTMAX 3\nT 4\ncostmode = level\nOSW 1 : cost = 10 ; lifetime = -\nACT 1 : pred = - ; modes = (2; 2)\n";

const CHAIN: &str = "MOSWACP v1\nN 3\nK 2\nQ 6\nTMAX 8\nT 10\ncostmode = level\n\
OSW 1 : cost = 10 ; lifetime = -\nOSW 2 : cost = 30 ; lifetime = -\n\
ACT 1 : pred = - ; modes = (2; 1,0)(1; 2,0)\nACT 2 : pred = 1 ; modes = (2; 0,1)\nACT 3 : pred = 2 ; modes = (1; 1,1)\n";

fn moswacp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moswacp")).args(args).env_remove("MOSWACP_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn case_study_prints_the_comparison() {
    let o = moswacp(&["case-study"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("22,800") && text.contains("34,550") && text.contains("11,750"), "{text}");
}

#[test]
fn case_study_json_report() {
    let o = moswacp(&["case-study", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["optimal_cost"], 22800.0);
    assert_eq!(v["traditional_cost"], 34550.0);
}

#[test]
fn exact_solve_of_a_single_activity() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "one.moswacp", ONE);
    let o = moswacp(&["solve", "--algo", "exact", "--instance", &inst]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["objective"], 20.0);
    assert_eq!(v["schema"], "solve-result v1");
}

#[test]
fn seeded_solves_are_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "chain.moswacp", CHAIN);
    for algo in ["ersa4", "ga", "sa", "pso"] {
        let run = |trace: &str| {
            let t = dir.path().join(trace);
            let o = moswacp(&["solve", "--algo", algo, "--instance", &inst, "--seed", "3", "--budget-iters", "300", "--trace", t.to_str().unwrap()]);
            assert!(o.status.success());
            (stdout(&o), std::fs::read_to_string(t).unwrap())
        };
        assert_eq!(run("a.csv"), run("b.csv"), "{algo}");
    }
}

#[test]
fn validate_accepts_a_result_and_flags_a_corrupted_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "chain.moswacp", CHAIN);
    let res = dir.path().join("r.json");
    let o = moswacp(&["solve", "--instance", &inst, "--budget-iters", "200", "--out", res.to_str().unwrap()]);
    assert!(o.status.success());
    let good = moswacp(&["validate", "--instance", &inst, "--solution", res.to_str().unwrap()]);
    assert!(good.status.success());
    assert!(stdout(&good).starts_with("feasible"));

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    v["solution"]["start"][2] = Value::from(0);
    let bad = file(dir.path(), "bad.json", &v.to_string());
    let o = moswacp(&["--json-errors", "validate", "--instance", &inst, "--solution", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("PRECEDENCE"));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "infeasible_solution");
}

#[test]
fn missing_instance_is_an_input_error() {
    let o = moswacp(&["--json-errors", "solve", "--instance", "/nonexistent/x.moswacp"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["code"], 1);
    assert!(err["message"].as_str().unwrap().contains("nonexistent"));
}

#[test]
fn invalid_instance_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "cyc.moswacp", &CHAIN.replace("ACT 1 : pred = -", "ACT 1 : pred = 3"));
    let o = moswacp(&["--json-errors", "solve", "--instance", &inst]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "invalid_instance");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "one.moswacp", ONE);
    assert_eq!(moswacp(&["export-lp", "--instance", &inst, "--alpha", "0.3"]).status.code(), Some(2));
    assert_eq!(moswacp(&["gen"]).status.code(), Some(2));
    assert_eq!(moswacp(&["solve", "--algo", "nope", "--instance", &inst]).status.code(), Some(2));
    let o = moswacp(&["--json-errors", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&o.stderr).unwrap()["error"], "usage");
}

#[test]
fn export_lp_writes_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "one.moswacp", ONE);
    for sem in ["literal", "time-indexed"] {
        let o = moswacp(&["export-lp", "--instance", &inst, "--semantics", sem]);
        assert!(o.status.success());
        let lp = stdout(&o);
        assert!(lp.starts_with("\\ MOSWACP linearized model") && lp.trim_end().ends_with("End"));
    }
}

#[test]
fn gen_bench_and_sweep_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = moswacp(&["gen", "--desk", "--recipe", "capacity", "--count", "2", "--seed", "4", "--out-dir", data.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_dir(&data).unwrap().count(), 2);

    let out = dir.path().join("bench");
    let o = moswacp(&["bench", "--dataset", data.to_str().unwrap(), "--algos", "ersa4,sa", "--seeds", "1,2", "--budget-iters", "200", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    for f in ["bench.csv", "summary.csv", "trace.csv", "convergence.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(out.join("bench.csv")).unwrap().lines().count(), 1 + 2 * 2 * 2);

    let sweep = dir.path().join("sweep");
    let o = moswacp(&["sweep-q", "--instance-dir", data.to_str().unwrap(), "--q", "5,8,100", "--algo", "exact", "--out-dir", sweep.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(sweep.join("sweep.svg").is_file());
    assert_eq!(std::fs::read_to_string(sweep.join("sweep.csv")).unwrap().lines().count(), 4);
    assert_eq!(moswacp(&["sweep-q", "--instance-dir", data.to_str().unwrap(), "--q", "5"]).status.code(), Some(2));
}

#[test]
fn gen_from_psplib_is_seeded() {
    let mm = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/j10_sample.mm");
    let a = moswacp(&["gen", "--from-psplib", mm, "--seed", "5"]);
    let b = moswacp(&["gen", "--from-psplib", mm, "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("MOSWACP v1\nN 10\n"));
}

#[test]
fn op_trace_records_operator_applications() {
    let dir = tempfile::tempdir().unwrap();
    let inst = file(dir.path(), "chain.moswacp", CHAIN);
    let trace = dir.path().join("ops.jsonl");
    let o = moswacp(&["--op-trace", trace.to_str().unwrap(), "solve", "--algo", "sa", "--instance", &inst, "--budget-iters", "100"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    assert!(text.lines().count() > 10);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["op"].is_string());
    }
}
