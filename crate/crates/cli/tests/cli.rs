use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegellab"))
        .args(args)
        .env_remove("SIEGELLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn rank_one_integrability_is_bounded() {
    let v = json(&run(&["integrability", "--type", "A", "--rank", "1", "--alpha", "1", "--json"]));
    assert_eq!(v["result"]["linf"], true);
    assert_eq!(v["result"]["l1"], true);
    assert_eq!(v["command"], "integrability");
}

#[test]
fn a3_middle_root_has_a_witness() {
    let v = json(&run(&["integrability", "--type", "A", "--rank", "3", "--alpha", "2", "--full", "--json"]));
    assert_eq!(v["result"]["linf"], false);
    assert!(v["result"]["witness"].is_string());
}

#[test]
fn meanvalue_z_score_is_small() {
    let v = json(&run(&["meanvalue", "--f", "ball:1", "--samples", "2e4", "--seed", "11", "--json"]));
    let z = v["result"]["z_score"].as_f64().unwrap();
    assert!(z.abs() <= 3.0, "z = {z}");
    assert_eq!(v["seed"], 11);
}

#[test]
fn cusp_csv_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cusp.csv");
    let mut runs = vec![];
    for _ in 0..2 {
        let out = run(&["cusp", "--samples", "5000", "--seed", "9", "--csv", path.to_str().unwrap()]);
        assert!(out.status.success());
        runs.push(fs::read(&path).unwrap());
    }
    let (a, b) = (runs.remove(0), runs.remove(0));
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("# config: command=cusp"));
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(run(&["meanvalue", "--f", "blob", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--model", "1,9", "--max-height", "2"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--T-grid", "e5:e2:4"]).status.code(), Some(2));
}

#[test]
fn oversized_enumeration_is_refused() {
    let out = run(&["enumerate", "--model", "1,6", "--max-height", "1e5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn enumerate_csv_lists_projective_points() {
    let out = run(&["enumerate", "--model", "1,2", "--max-height", "1.2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    // heights are 1 for the axes and sqrt 2 for the diagonals
    assert_eq!(rows.len(), 2, "{text}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# mean value run\nsamples = 3000\nseed = 5\njson = true\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&run(&["--config", c, "meanvalue", "--f", "ball:1", "--seed", "6"]));
    assert_eq!(v["result"]["samples"], 3000);
    assert_eq!(v["seed"], 6);

    fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = run(&["--config", c, "meanvalue", "--f", "ball:1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn count_csv_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("count.csv");
    let p = path.to_str().unwrap();
    let out = run(&["count", "--T-grid", "e2:e6:5", "--ensemble", "20", "--seed", "4", "--csv", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let direct = json(&out)["result"]["fit"]["fit"]["slope"].as_f64().unwrap();
    let refit = json(&run(&["count", "fit", "--input", p]))["slope"].as_f64().unwrap();
    assert!((direct - refit).abs() < 1e-12, "{direct} vs {refit}");
}

#[test]
fn workers_env_takes_precedence() {
    let out = Command::new(env!("CARGO_BIN_EXE_siegellab"))
        .args(["--workers", "1", "meanvalue", "--f", "zero", "--samples", "100", "--seed", "1", "--json"])
        .env("SIEGELLAB_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(json(&out)["workers"], 2);
}

#[test]
fn quick_selftest_subset_passes() {
    let out = run(&["selftest", "--quick", "--only", "1,4,9"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.matches("[PASS]").count(), 3, "{text}");
}
