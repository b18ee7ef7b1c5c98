use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freebool_cli::{cmd_checkeq, cmd_condexp, cmd_linearize, cmd_moments, cmd_oracle, moments_from_json, Job};
use serde_json::{json, Value};

fn jobs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("jobs");
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("jobs").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freebool")).args(args).output().unwrap()
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn scratch(name: &str, v: &Value) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freebool-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn moments_match_the_oracle_on_bundled_jobs() {
    for p in jobs() {
        let job = Job::from_file(&p).unwrap();
        if job.poly().is_none() {
            continue;
        }
        let mut j = job.clone();
        j.order = 6;
        let m = moments_from_json(&cmd_moments(&j).unwrap().json).unwrap();
        let o = moments_from_json(&cmd_oracle(&j).unwrap().json).unwrap();
        assert_eq!(m[..=6], o[..=6], "{}", p.display());
    }
}

#[test]
fn emitted_json_reparses_to_equal_values() {
    for p in jobs() {
        let job = Job::from_file(&p).unwrap();
        let mut outs = vec![cmd_linearize(&job).unwrap(), cmd_condexp(&Job { order: 8, ..job.clone() }).unwrap()];
        if job.poly().is_some() {
            outs.push(cmd_moments(&Job { order: 8, ..job.clone() }).unwrap());
        }
        for o in outs {
            let text = serde_json::to_string(&o.json).unwrap();
            assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), o.json);
        }
        // the job's own distribution block reads back to the same marginals
        let again = Job::from_json(&json!({"expression": job.text, "variables": job.distributions_json()})).unwrap();
        assert_eq!(again.distributions_json(), job.distributions_json());
    }
}

#[test]
fn degree_three_moments_file() {
    let out = std::env::temp_dir().join(format!("freebool-t3-{}.json", std::process::id()));
    let o = run(&["moments", bundled("t3-semicircle").to_str().unwrap(), "--order", "16", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for c in ["\"6\"", "\"96\"", "\"2064\""] {
        assert!(text.contains(c), "{c}");
    }
    std::fs::remove_file(out).ok();
}

#[test]
fn walk_quartic_vanishes_to_the_order() {
    let v = json_of(&run(&["checkeq", bundled("walk").to_str().unwrap(), "--order", "16"]));
    assert_eq!(v["equations"][0]["residual_order"], json!("≥ 17"));
}

#[test]
fn csv_output() {
    let o = run(&["oracle", bundled("additive").to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("k,value\n0,1\n1,0\n2,2\n"));
    let o = run(&["linearize", bundled("additive").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn retained_set_from_the_command_line() {
    let v = json_of(&run(&["condexp", bundled("additive").to_str().unwrap(), "--order", "6", "--retain", "Y"]));
    assert_eq!(v["retained"], json!(["Y"]));
    // E_Y[(1 - z(X+Y))^-1]: the Y coefficient starts at z
    assert_eq!(v["expansion"]["Y"][1], json!("1"));
    assert_eq!(v["polynomial"], json!("Y"));
}

#[test]
fn rational_jobs_report_stabilization() {
    let v = json_of(&run(&["moments", bundled("rational").to_str().unwrap(), "--order", "12"]));
    assert_eq!(v["mode"], json!("s"));
    assert!(v["stabilization_order"].as_u64().unwrap() >= 12);
    // φ(X R X) at s² is φ(X²) = 1
    assert_eq!(v["coefficients"][2], json!(["0", "1"]));
}

#[test]
fn exit_codes() {
    let empty = scratch("empty.json", &json!({"expression": "  ", "variables": {}}));
    assert_eq!(run(&["moments", empty.to_str().unwrap()]).status.code(), Some(2));
    let zero = scratch("zero.json", &json!({"expression": "X - X", "variables": {"X": "semicircle"}}));
    assert_eq!(run(&["moments", zero.to_str().unwrap()]).status.code(), Some(2));
    let unknown = scratch("unknown.json", &json!({"expression": "X", "variables": {"X": "cauchy"}}));
    assert_eq!(run(&["oracle", unknown.to_str().unwrap()]).status.code(), Some(2));
    let extra = scratch("extra.json", &json!({"expression": "X", "variables": {"X": "semicircle"}, "colour": 1}));
    assert_eq!(run(&["oracle", extra.to_str().unwrap()]).status.code(), Some(2));
    // a constant term cannot be linearized into a nilpotent pencil
    let constant = scratch("constant.json", &json!({"expression": "1 + X", "variables": {"X": "semicircle"}}));
    assert_eq!(run(&["moments", constant.to_str().unwrap()]).status.code(), Some(3));
    let wrong = scratch(
        "wrong.json",
        &json!({"expression": "X + Y", "variables": {"X": "semicircle", "Y": "semicircle"}, "order": 8,
                "equations": ["z^2*M^2 - M + 1"]}),
    );
    let o = run(&["checkeq", wrong.to_str().unwrap()]);
    let v = json_of(&o);
    assert_eq!(v["equations"][0]["residual_order"], json!(2));
    assert_eq!(run(&["checkeq", wrong.to_str().unwrap(), "--assert"]).status.code(), Some(4));
    assert_eq!(run(&["checkeq", bundled("additive").to_str().unwrap(), "--assert"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["condexp", bundled("t3-semicircle").to_str().unwrap(), "--order", "8"]);
    let b = run(&["condexp", bundled("t3-semicircle").to_str().unwrap(), "--order", "8"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn checkeq_reports_every_equation() {
    let job = Job::from_file(&bundled("t3-semicircle")).unwrap();
    let (out, ok) = cmd_checkeq(&Job { order: 12, ..job }).unwrap();
    assert!(ok);
    assert_eq!(out.json["equations"].as_array().unwrap().len(), 3);
}

#[test]
fn small_random_matrix_run() {
    let p = scratch(
        "rmt.json",
        &json!({"expression": "X*Y + Y*X", "variables": {"X": "semicircle", "Y": "semicircle"},
                "rmt": {"n": 200, "seed": 3, "k_max": 4}}),
    );
    let v = json_of(&run(&["rmt", p.to_str().unwrap()]));
    let r = v["report"].as_array().unwrap();
    assert_eq!(r.len(), 4);
    assert_eq!(r[1]["target"], json!("2"));
    assert!((r[1]["estimate"].as_f64().unwrap() - 2.0).abs() < 0.2);
    let again = json_of(&run(&["rmt", p.to_str().unwrap()]));
    assert_eq!(v, again);
}
