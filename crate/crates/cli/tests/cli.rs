use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minfact"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn lines(o: &Output) -> usize {
    String::from_utf8_lossy(&o.stdout).lines().count()
}

const EIGHT: &str = r#"{"schema":"minfact/factorization/v1","n":8,"cycles":[[5,6,7,8],[2,3],[1,2,5],[4,5]]}"#;

#[test]
fn enumerate_counts() {
    assert_eq!(lines(&run(&["enumerate", "--n", "4"])), 25);
    assert_eq!(lines(&run(&["enumerate", "--n", "4", "--class", "2,2,2"])), 16);
    assert_eq!(lines(&run(&["enumerate", "--n", "2"])), 1);
    assert_eq!(run(&["enumerate", "--n", "9"]).status.code(), Some(2));
}

#[test]
fn sample_is_reproducible() {
    let a = run(&["sample", "--n", "300", "--seed", "42", "--weights", "uniform"]);
    let b = run(&["sample", "--n", "300", "--seed", "42", "--weights", "uniform"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "minfact/factorization/v1");
}

#[test]
fn sample_cycle_count_in_band() {
    let o = run(&["sample", "--n", "1000", "--seed", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let k = v["cycles"].as_array().unwrap().len() as f64 / 1000.0;
    assert!((0.55..=0.68).contains(&k), "{k}");
}

#[test]
fn transpositions_only() {
    let o = run(&["sample", "--n", "10", "--seed", "1", "--weights", "delta:2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cycles = v["cycles"].as_array().unwrap();
    assert_eq!(cycles.len(), 9);
    assert!(cycles.iter().all(|c| c.as_array().unwrap().len() == 2));
}

#[test]
fn seed_required() {
    assert_eq!(run(&["sample", "--n", "10"]).status.code(), Some(1));
    assert_eq!(run(&["stats", "cycle-count", "--n", "10"]).status.code(), Some(1));
}

#[test]
fn weights_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.json");
    std::fs::write(&p, r#"{"kind": "explicit", "weights": [1.0, 0.0, 2.0]}"#).unwrap();
    let o = run(&["sample", "--n", "50", "--seed", "3", "--weights", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&p, r#"{"kind": "explicit", "weights": [0.0, 0.0]}"#).unwrap();
    assert_eq!(run(&["sample", "--n", "5", "--seed", "3", "--weights", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn tree_round_trip_through_convert() {
    let t = run(&["sample", "--n", "200", "--seed", "5", "--emit", "tree"]);
    assert!(t.status.success());
    let f = run_stdin(&["convert", "--to", "factorization"], &t.stdout);
    assert!(f.status.success());
    let back = run_stdin(&["convert", "--to", "tree"], &f.stdout);
    assert_eq!(back.stdout, t.stdout);
}

#[test]
fn lamination_round_trip() {
    let lam = run_stdin(&["convert", "--to", "lamination"], EIGHT.as_bytes());
    let f = run_stdin(&["convert", "--to", "factorization"], &lam.stdout);
    let v: serde_json::Value = serde_json::from_slice(&f.stdout).unwrap();
    let orig: serde_json::Value = serde_json::from_str(EIGHT).unwrap();
    assert_eq!(v["cycles"], orig["cycles"]);
}

#[test]
fn invalid_inputs_exit_two() {
    let bad = r#"{"schema":"minfact/factorization/v1","n":3,"cycles":[[1,3],[1,2]]}"#;
    assert_eq!(run_stdin(&["render"], bad.as_bytes()).status.code(), Some(2));
    assert_eq!(run_stdin(&["render"], b"not json").status.code(), Some(2));
    let tree = r#"{"schema":"minfact/tree/v1","children":[[1],[]],"black_labels":{}}"#;
    assert_eq!(run_stdin(&["convert", "--to", "factorization"], tree.as_bytes()).status.code(), Some(2));
}

#[test]
fn render_conventions() {
    let o = run_stdin(&["render"], EIGHT.as_bytes());
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.contains("version=\"1.1\""));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("<polygon").count(), 4);
    assert!(svg.contains("fill=\"black\""));
}

#[test]
fn render_empty_frames_is_circle() {
    let ppp = run(&["process", "--excursion", "tent", "--seed", "1", "--c", "0", "--eps", "0.5"]);
    assert!(ppp.stdout.is_empty());
    let one = run_stdin(&["render"], br#"{"r":1.0,"type":"chord","angles":[0.1,0.4]}"#);
    let svg = String::from_utf8(one.stdout).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("<line").count(), 1);
}

#[test]
fn frame_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    std::fs::write(&input, EIGHT).unwrap();
    for (frames, expected) in [(2usize, 2usize), (10, 5)] {
        let out = dir.path().join(format!("frames{frames}"));
        let o = run(&[
            "render",
            "--input",
            input.to_str().unwrap(),
            "--frames",
            &frames.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut names: Vec<String> =
            std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names.len(), expected);
        assert_eq!(names[0], "frame_000.svg");
        let last = std::fs::read_to_string(out.join(&names[expected - 1])).unwrap();
        assert_eq!(last.matches("<polygon").count(), 4);
    }
}

#[test]
fn no_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.json");
    std::fs::write(&p, "x").unwrap();
    let o = run(&["sample", "--n", "5", "--seed", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "x");
    let o = run(&["sample", "--n", "5", "--seed", "1", "--out", p.to_str().unwrap(), "--force"]);
    assert!(o.status.success());
}

#[test]
fn stats_reports() {
    let o = run(&["stats", "p-nu", "--weights", "uniform"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["mean"].as_f64().unwrap() - (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-10);
    let o = run(&["stats", "cycle-count", "--weights", "delta:3", "--n", "1001", "--trials", "20", "--seed", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["mean"].as_f64().unwrap() - 0.5).abs() < 0.02);
    let o = run(&["stats", "counting", "--n", "5"]);
    assert!(o.status.success());
    let o = run(&["stats", "largest-cycle", "--n", "100,200", "--trials", "10", "--seed", "1", "--csv", "--threads", "2"]);
    assert_eq!(lines(&o), 3);
}

#[test]
fn failed_check_exits_three() {
    // at n = 3 the cycle count is 1 or 2, far from the limit fraction
    let o = run(&["stats", "cycle-count", "--weights", "uniform", "--n", "3", "--trials", "400", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn process_dumps() {
    let o = run_stdin(&["process"], EIGHT.as_bytes());
    assert_eq!(lines(&o), 4);
    let o = run(&["process", "--excursion", "stable:1.5:200", "--seed", "2", "--c", "5", "--eps", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
