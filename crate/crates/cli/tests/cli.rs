use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ssmst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmst")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn milestones_for_sixteen() {
    let out = ssmst(&["milestones", "--n", "16", "--k", "-1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["milestones"], serde_json::json!([1, 4, 16]));
    assert_eq!(v["size"], 3);

    let out = ssmst(&["milestones", "--n", "16", "--k", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_then_verify_the_dumped_labels() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.jsonl");
    let result = dir.path().join("result.json");
    let graph = "gen:random_connected:10:uniform_1_to_n:4";
    let out = ssmst(&[
        "simulate",
        "--graph",
        graph,
        "--k",
        "1",
        "--scheduler",
        "random_subset",
        "--corrupt",
        "random_bits",
        "--seed",
        "3",
        "--out",
        result.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(r["cause"], "silent");
    assert_eq!(r["verified"], true);

    let out = ssmst(&["verify", "--labels", labels.to_str().unwrap(), "--graph", graph, "--k", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["rejecting"], serde_json::json!([]));

    // a label claiming the wrong network size is caught
    let text = fs::read_to_string(&labels).unwrap().replacen("\"total\":10", "\"total\":11", 1);
    fs::write(&labels, text).unwrap();
    let out = ssmst(&["verify", "--labels", labels.to_str().unwrap(), "--graph", graph, "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stdout_json(&out)["rejecting"].as_array().unwrap().is_empty());
}

#[test]
fn graph_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tri.txt");
    fs::write(&g, "# triangle\n3 3\n1 2 1\n2 3 2\n1 3 3\n").unwrap();
    let out = ssmst(&["simulate", "--graph", g.to_str().unwrap(), "--k", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["tree_weight"], 3);
    assert_eq!(v["ratio"], "1/1");

    let out = ssmst(&["simulate", "--graph", "missing.txt", "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fleet_output_does_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        r#"graphs = ["gen:random_connected:6:distinct_shuffled:1", "gen:grid:9:all_equal:2"]
k = ["min", "max"]
schedulers = ["single_random", "adversarial_stubborn"]
corruptions = ["none", "swap_states"]
seeds = [1, 2]
"#,
    )
    .unwrap();
    let mut outs = Vec::new();
    for jobs in ["1", "3"] {
        let out_path = dir.path().join(format!("out{jobs}.jsonl"));
        let csv_path = dir.path().join(format!("out{jobs}.csv"));
        let out = ssmst(&[
            "fleet",
            "--spec",
            spec.to_str().unwrap(),
            "--jobs",
            jobs,
            "--out",
            out_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
        let text = fs::read_to_string(&out_path).unwrap();
        assert_eq!(text.lines().count(), 2 * 2 * 2 * 2 * 2);
        assert_eq!(fs::read_to_string(&csv_path).unwrap().lines().count(), 33);
        outs.push(text);
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn empty_fleet_is_fine() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"graphs": [], "k": [0], "schedulers": [], "corruptions": [], "seeds": []}"#).unwrap();
    let out_path = dir.path().join("out.jsonl");
    let out = ssmst(&["fleet", "--spec", spec.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&out_path).unwrap(), "");
}

#[test]
fn calibrate_requires_explicit_limits() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "graphs = [\"gen:path:5:uniform:1\"]\nk = [0]\nschedulers = [\"all_enabled\"]\ncorruptions = [\"none\"]\nseeds = [0]\n")
        .unwrap();
    let out = ssmst(&["calibrate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(
        &spec,
        "graphs = [\"gen:path:5:uniform:1\"]\nk = [0]\nschedulers = [\"all_enabled\"]\ncorruptions = [\"none\"]\nseeds = [0]\nalpha = 1000\nmax_rounds = 100000\n",
    )
    .unwrap();
    let out = ssmst(&["calibrate", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("alpha_needed"));
}
