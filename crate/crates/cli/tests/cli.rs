use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn upr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upr"))
        .args(args)
        .current_dir(dir)
        .env("SOLVER_BACKEND", "bundled")
        .output()
        .expect("run upr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = upr(&["gen", "--family", "tiny", "--seed", "3", "-o", "inst.json"], d);
    assert!(o.status.success(), "{o:?}");

    let o = upr(&["solve", "inst.json", "--method", "ddd", "--alpha", "0.01", "-o", "sol.json", "--log", "run.jsonl"], d);
    assert!(o.status.success(), "{o:?}");
    let log = fs::read_to_string(d.join("run.jsonl")).unwrap();
    assert!(log.lines().count() >= 1);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("iteration").is_some() && v.get("lb").is_some());
    }

    let o = upr(&["verify", "inst.json", "sol.json"], d);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("ok: makespan"));
}

#[test]
fn methods_agree_on_makespan() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(upr(&["gen", "--family", "tiny", "--seed", "11", "--set", "k=5", "-o", "inst.json"], d).status.success());
    let mut spans = Vec::new();
    for m in ["full-ip", "ddd", "two-phase"] {
        let o = upr(&["solve", "inst.json", "--method", m, "--alpha", "0", "--gap", "0"], d);
        assert!(o.status.success(), "{m}: {o:?}");
        let line = stdout(&o).lines().find(|l| l.starts_with("makespan")).unwrap().to_string();
        spans.push(line);
    }
    assert_eq!(spans[0], spans[1]);
    assert_eq!(spans[0], spans[2]);
}

#[test]
fn verify_rejects_tampered_solution() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(upr(&["gen", "--family", "tiny", "--seed", "3", "-o", "inst.json"], d).status.success());
    assert!(upr(&["solve", "inst.json", "-o", "sol.json"], d).status.success());
    let mut sol: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("sol.json")).unwrap()).unwrap();
    let visits = sol["paths"][0]["visits"].as_array_mut().unwrap();
    let last = visits.last_mut().unwrap();
    last["arrival"] = serde_json::json!(0);
    fs::write(d.join("bad.json"), sol.to_string()).unwrap();
    let o = upr(&["verify", "inst.json", "bad.json"], d);
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn solve_config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(upr(&["gen", "--family", "tiny", "--seed", "5", "-o", "inst.json"], d).status.success());
    fs::write(d.join("solve.toml"), "method = \"full_ip\"\nalpha = 0.0\n").unwrap();
    let o = upr(&["solve", "inst.json", "--config", "solve.toml"], d);
    assert!(stdout(&o).starts_with("full_ip"), "{o:?}");
    let o = upr(&["solve", "inst.json", "--config", "solve.toml", "--method", "two-phase"], d);
    assert!(stdout(&o).starts_with("two_phase"), "{o:?}");

    fs::write(d.join("bad.toml"), "methd = \"ddd\"\n").unwrap();
    let o = upr(&["solve", "inst.json", "--config", "bad.toml"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        vec!["solve"],
        vec!["solve", "missing.json"],
        vec!["gen", "-o", "x.json"],
        vec!["solve", "x.json", "--method", "simplex"],
        vec!["frobnicate"],
    ] {
        let o = upr(&args, d);
        assert!(!o.status.success(), "{args:?}");
    }
}

#[test]
fn bench_tiny_matrix_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = r#"
methods = ["full_ip", "ddd", "two_phase"]
ub_factors = [1.0]
time_limit_s = 60
rel_gap = 0.0
alpha = 0.0

[generator]
n = [3, 4, 5]
k = [2, 3, 4]
seeds = [7]

[generator.base]
family = "tiny"
"#;
    fs::write(d.join("bench.toml"), cfg).unwrap();
    let o = upr(&["bench", "bench.toml", "--out-dir", "out"], d);
    assert!(o.status.success(), "{o:?}");

    let text = fs::read_to_string(d.join("out/results.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,method,ub_factor,status,wall_s,makespan,iters,ns_ratio,short_viol,thr_viol,sto_viol,nodes_short,nodes_thr,nodes_sto"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    for m in ["full_ip", "ddd", "two_phase"] {
        assert_eq!(rows.iter().filter(|r| r[1] == m).count(), 9, "{m}");
    }
    for chunk in rows.chunks(3) {
        assert!(chunk.iter().all(|r| r[3] == "solved"));
        assert!(chunk.iter().all(|r| r[5] == chunk[0][5]), "{chunk:?}");
    }

    let o = upr(&["report", "out", "--out-dir", "rep"], d);
    assert!(o.status.success(), "{o:?}");
    for f in ["runtime.csv", "cumulative.csv", "violations.csv"] {
        assert!(d.join("rep").join(f).exists(), "{f}");
    }
    let curve = fs::read_to_string(d.join("rep/cumulative.csv")).unwrap();
    assert!(curve.starts_with("method,ub_factor,time_s,solved"));
}
