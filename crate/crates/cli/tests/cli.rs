use std::path::Path;
use std::process::{Command, Output};

fn exit_tail(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exit-tail"))
        .current_dir(dir)
        .args(args)
        .env_remove("EXIT_TAIL_SEED")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const CHAIN: &str = "# lazy walk on a triangle\n3\n0.5 0.25 0.25\n0.25 0.5 0.25\n0.25 0.25 0.5\n";

#[test]
fn small_suite_passes_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("suite.cfg"),
        "instances = 8\nmc_instances = 2\npair_chains = 2\npairs_per_chain = 10\n# unused on purpose\nextra = 1\n",
    )
    .unwrap();
    let out = exit_tail(dir.path(), &["verify", "suite", "--config", "suite.cfg", "--replicas", "300", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = json(&dir.path().join("o/manifest.json"));
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["seed"], 20_240_601);
    assert_eq!(manifest["config"]["instances"]["source"], "file");
    assert_eq!(manifest["config"]["replicas"]["source"], "flag");
    assert_eq!(manifest["config"]["seed"]["source"], "default");
    assert_eq!(manifest["unused_keys"], serde_json::json!(["extra"]));
    assert!(dir.path().join("o/properties.csv").exists());
    assert!(!dir.path().join("o/error.json").exists());
}

#[test]
fn malformed_chain_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2\n0.5 0.5\n0.5 oops\n").unwrap();
    let out = exit_tail(dir.path(), &["chain", "analyze", "--chain", "bad.txt", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3));
    let err = json(&dir.path().join("o/error.json"));
    assert_eq!(err["kind"], "parse");
    assert_eq!(err["line"], 3);
}

#[test]
fn bad_config_line_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "seed = 1\nthis line has no pair\n").unwrap();
    let out = exit_tail(dir.path(), &["scan", "question33", "--config", "c.cfg", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&dir.path().join("o/error.json"))["line"], 2);
}

#[test]
fn usage_errors_exit_3_and_help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exit_tail(dir.path(), &["nonsense"]).status.code(), Some(3));
    assert_eq!(exit_tail(dir.path(), &["--help"]).status.code(), Some(0));
    let missing = exit_tail(dir.path(), &["bound", "tmain", "--out", "o"]);
    assert_eq!(missing.status.code(), Some(3));
    assert_eq!(json(&dir.path().join("o/error.json"))["kind"], "usage");
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dynperc", "survival", "--set", "n=8", "--replicas", "400", "--seed", "11", "--set", "rate=0.2"];
    let a = exit_tail(dir.path(), &[&args[..], &["--out", "a"]].concat());
    let b = exit_tail(dir.path(), &[&args[..], &["--out", "b", "--threads", "1"]].concat());
    assert_eq!(a.status.code(), b.status.code());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("survival.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn tail_stays_below_bound_on_a_small_chain() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), CHAIN).unwrap();
    let out = exit_tail(
        dir.path(),
        &["bound", "tmain", "--chain", "c.txt", "--set", "event=0,1", "--set", "t=1:30", "--out", "o"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/bound.csv")).unwrap();
    assert!(csv.starts_with("t,target,bound,argmin_k,slack\n"));
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn environment_overrides_the_file_and_flags_override_both() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "instances = 3\nseed = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_exit-tail"))
        .current_dir(dir.path())
        .args(["scan", "question33", "--config", "c.cfg", "--seed", "5", "--out", "o"])
        .env("EXIT_TAIL_INSTANCES", "4")
        .env("EXIT_TAIL_SEED", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let manifest = json(&dir.path().join("o/manifest.json"));
    assert_eq!(manifest["config"]["instances"]["value"], "4");
    assert_eq!(manifest["config"]["instances"]["source"], "env");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(json(&dir.path().join("o/scan.json"))["instances"].as_array().unwrap().len(), 4);
}
