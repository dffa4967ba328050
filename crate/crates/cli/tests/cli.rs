use std::path::Path;
use std::process::{Command, Output};

fn weyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl")).args(args).env_remove("WEYL_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn vinogradov_count_prints_fifteen() {
    let o = weyl(&["count", "--vinogradov", "--d", "2", "--l", "2", "--N", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "15");
}

#[test]
fn parseval_moment() {
    let o = weyl(&["moment", "--d", "1", "--N", "32", "--p", "2", "--box", "full", "--seq", "const"]);
    assert_eq!(code(&o), 0);
    let value: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - 32.0).abs() <= 1e-10);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&weyl(&["moment", "--no-such-flag"])), 64);
    assert_eq!(code(&weyl(&["frobnicate"])), 64);
    assert_eq!(code(&weyl(&["moment", "--d", "1", "--N", "8"])), 64, "missing --p");
    assert_eq!(code(&weyl(&["moment", "--d", "1", "--N", "8", "--p=-1"])), 2);
    assert_eq!(code(&weyl(&["moment", "--d", "2", "--N", "8", "--p", "4", "--quad", "grid:2,2"])), 2);
    assert_eq!(code(&weyl(&["count", "--vinogradov", "--d", "2", "--l", "3", "--N", "500", "--max-tuples", "1000"])), 3);
    assert_eq!(code(&weyl(&["verify", "nonsense"])), 64);
    assert_eq!(code(&weyl(&["--help"])), 0);
}

#[test]
fn heavy_suite_respects_wall_budget() {
    let o = weyl(&["verify", "decoupling-heavy", "--max-seconds", "1"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sphere_suite_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = weyl(&["verify", "sphere", "--json", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["suite"], "sphere");
    assert_eq!(json["passed"], true);
}

#[test]
fn l4_suite_with_injected_small_beta_reports_growth() {
    let o = weyl(&["verify", "l4", "--beta", "0.6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("beta 0.6: slope"));
}

fn run_with_results(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args = vec!["moment", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = weyl(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn stored_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let flags = ["--d", "2", "--N", "6", "--p", "3", "--box", "0,0;0.5,1", "--quad", "mc:2000", "--seed", "9"];
    let mut first: Vec<&str> = flags.to_vec();
    first.extend(["--save-config", cfg.to_str().unwrap()]);
    let a = run_with_results(dir.path(), "a.csv", &first);
    let b = run_with_results(dir.path(), "b.csv", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(a, b);
    assert!(a.starts_with("schema_version,experiment,d,N,p,j,method,value,stderr,seed,wall_ms\n"));
    assert!(a.contains(",mc,") && a.contains(",9,0\n"), "{a}");

    // A config written for another subcommand is refused.
    let o = weyl(&["count", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
}

#[test]
fn output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let flags = ["--d", "3", "--N", "8", "--p", "5", "--quad", "mc:4000", "--seed", "3"];
    let mut one: Vec<&str> = flags.to_vec();
    one.extend(["--threads", "1"]);
    let mut four: Vec<&str> = flags.to_vec();
    four.extend(["--threads", "4"]);
    assert_eq!(run_with_results(dir.path(), "one.csv", &one), run_with_results(dir.path(), "four.csv", &four));
}

#[test]
fn shell_writes_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shell.csv");
    let o = weyl(&["shell", "--N", "25", "--gamma", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("|S_25| = 7") && stdout(&o).contains("arc max count 2"));
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("N,x,y\n25,5,0\n"));
    let empty = weyl(&["shell", "--N", "3"]);
    assert!(stdout(&empty).contains("|S_3| = 0"));
}

#[test]
fn other_subcommands_run() {
    let o = weyl(&["eval", "--d", "2", "--N", "4", "--x", "-0.25,0.5"]);
    let parts: Vec<f64> = stdout(&o).split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert!(parts[2] < 1e-12, "{parts:?}");

    let o = weyl(&["kernel", "--d", "3", "--N", "5", "--beta", "0", "--seq", "unimodular:2"]);
    assert_eq!(code(&o), 0);

    let o = weyl(&["fit", "--d", "1", "--p", "2", "--ladder", "8,16,32,64"]);
    assert!(stdout(&o).starts_with("slope 1"), "{}", stdout(&o));

    let o = weyl(&["fit", "--d", "2", "--p", "2", "--N", "64", "--over", "j", "--ladder", "1,2,3,4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = weyl(&["surface-moment", "--surface", "flat:2", "--N", "6", "--p", "2"]);
    let v: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 6.0).abs() < 1e-10);

    let o = weyl(&["decoupling", "--statement", "a11", "--N", "8", "--seq", "const", "--samples", "2048"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("ratio "));

    let o = weyl(&["count", "--sumset", "1,2,4"]);
    assert_eq!(stdout(&o).trim(), "7");

    let o = weyl(&["moment", "--d", "2", "--N", "9", "--p", "2", "--j", "0", "--normalize", "l2", "--seq", "rademacher:4"]);
    let v: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-12);
}
