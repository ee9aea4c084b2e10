use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cluster-seeds"))
        .args(args)
        .env_remove("CLUSTER_SEEDS_BUDGET")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, 0, "{stderr}");
    serde_json::from_str(&stdout).unwrap()
}

#[test]
fn explore_presets() {
    let a2 = run_json(&["explore", "A2"]);
    assert_eq!(a2["status"], "closed");
    assert_eq!(a2["seed_count"], 10);
    let a1 = run_json(&["explore", "A1"]);
    assert_eq!(a1["seed_count"], 2);
    let markov = run_json(&["explore", "markov3", "--budget", "500"]);
    assert_eq!(markov["status"], "budget-exhausted");
    let bound = run_json(&["explore", "A2tilde-noncyclic", "--lower-bound", "--budget", "10001"]);
    assert_eq!(bound["at_least"], 10001);
    assert_eq!(bound["exhausted"], false);
    let quivers = run_json(&["explore", "A2tilde-noncyclic", "--level", "quiver"]);
    assert_eq!(quivers["seed_count"], 12);
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cluster-seeds"))
        .args(["explore", "A3"])
        .env("CLUSTER_SEEDS_BUDGET", "20")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "budget-exhausted");
    assert_eq!(v["seed_count"], 20);
}

#[test]
fn explore_is_reproducible_and_writes_dot() {
    let dir = std::env::temp_dir().join(format!("cluster-seeds-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("a2.dot");
    let dot = dot.to_str().unwrap();
    let (_, first, _) = run(&["explore", "A2", "--dot", dot]);
    let dot_text = std::fs::read_to_string(dot).unwrap();
    let (_, second, _) = run(&["explore", "A2", "--dot", dot]);
    assert_eq!(first, second);
    assert_eq!(dot_text, std::fs::read_to_string(dot).unwrap());
    assert!(dot_text.starts_with("graph seeds {"));
    assert_eq!(dot_text.matches(" -- ").count(), 10);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn explore_from_file() {
    let dir = std::env::temp_dir().join(format!("cluster-seeds-file-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q.json");
    std::fs::write(&path, r#"{"n": 2, "b": [[0, 1], [-1, 0]]}"#).unwrap();
    let v = run_json(&["explore", path.to_str().unwrap()]);
    assert_eq!(v["seed_count"], 10);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn quotient_counts() {
    let a3 = run_json(&["quotient", "A3", "--relation", "same-quiver"]);
    assert_eq!(a3["classes"], 14);
    assert_eq!(a3["group"]["order"], 6);
    let a2t = run_json(&["quotient", "A2tilde-noncyclic", "--relation", "similar", "--budget", "300"]);
    assert_eq!(a2t["level"], "quiver");
    assert_eq!(a2t["classes"], 6);
    let sim = run_json(&["quotient", "A2", "--relation", "similar"]);
    let stab = run_json(&["quotient", "A2", "--relation", "same-stabilizer"]);
    assert_eq!(sim["classes"], stab["classes"]);
    assert_eq!(sim["group"], stab["group"]);
    assert!(sim["graph"]["vertices"].as_array().unwrap().len() == 1);
}

#[test]
fn verify_suites_exit_codes() {
    let (code, stdout, _) = run(&["verify", "markov", "--depth", "3"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("checks passed"));
    let (code, stdout, _) = run(&["verify", "properties", "--cases", "20", "--json"]);
    assert_eq!(code, 0);
    let rows: Vec<Value> = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["pass"] == true));
    let (code, _, stderr) = run(&["verify", "markov", "--depth", "40"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("depth 40"));
}

#[test]
fn bad_input_fails() {
    let (code, _, stderr) = run(&["explore", "no-such-thing"]);
    assert_ne!(code, 0);
    assert!(stderr.contains("no-such-thing"));
    let (code, _, _) = run(&["quotient", "A2", "--relation", "nonsense"]);
    assert_ne!(code, 0);
    let (code, _, stderr) = run(&["quotient", "markov3", "--relation", "same-stabilizer", "--budget", "50"]);
    assert_ne!(code, 0, "{stderr}");
}
