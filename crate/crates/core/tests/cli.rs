use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_caccioppoli"));
    c.env_remove("CACCIOPPOLI_JOBS");
    c
}

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(rel: &str) -> String {
    asset(rel).to_string_lossy().into_owned()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&run(&["validate", &path("data/remark_n4.json")])), 0);
    let t = run(&["validate", &path("data/tjunction.json")]);
    assert_eq!(code(&t), 1);
    assert!(stdout(&t).contains("non-conforming edge"));
    assert_eq!(code(&run(&["validate", &path("data/truncated.json")])), 2);
    assert_eq!(code(&run(&["validate", "/nonexistent/file.json"])), 2);
}

/// `F` column of the single CSV row printed by `eval`.
fn eval_row(file: &str, integrand: &str) -> Vec<String> {
    let o = run(&["eval", &path(file), "--integrand", integrand]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("integrand,F,perimeter,total_variation,facets"));
    lines.next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn eval_examples() {
    let r = eval_row("data/remark_limit.json", "one");
    assert_eq!(r[1].parse::<f64>().unwrap(), 1.0);
    for file in ["data/remark_n4.json", "data/split_square.json", "data/triple_phase.json"] {
        let r = eval_row(file, "jump");
        assert_eq!(r[1], r[3], "{file}");
    }
    let r = eval_row("data/split_square.json", "aniso-x");
    assert_eq!(r[1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn eval_rejects_unknown_integrand_and_bad_mesh() {
    assert_eq!(code(&run(&["eval", &path("data/split_square.json"), "--integrand", "two"])), 2);
    assert_eq!(code(&run(&["eval", &path("data/split_square.json"), "--quad-order", "0"])), 2);
    assert_eq!(code(&run(&["eval", &path("data/tjunction.json")])), 1);
}

#[test]
fn eval_json() {
    let o = run(&[
        "eval",
        &path("data/split_square.json"),
        "--integrand",
        "one",
        "--integrand",
        "jump",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["integrand"], "jump");
    assert_eq!(v[1]["F"].as_f64(), Some(1.0));
}

fn last_row(csv: &str) -> Vec<String> {
    csv.lines().last().unwrap().split(',').map(String::from).collect()
}

#[test]
fn run_remark_is_expected_non_convergence() {
    let o = run(&["run", &path("scenarios/remark.json")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("n,l1_gap,perim_gap,tv_gap,fgap_one,l1,strict,jump_strict\n"));
    let last = last_row(&out);
    assert_eq!(last[4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(&last[5..], ["true", "true", "false"]);
}

#[test]
fn run_shrinking_sawtooth_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ss.csv");
    let o = run(&["run", &path("scenarios/sawtooth-shrink.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&out).unwrap();
    assert_eq!(&last_row(&table)[8..], ["true", "true", "true"]);
    let lifting = std::fs::read_to_string(dir.path().join("ss.csv.lifting.csv")).unwrap();
    assert!(lifting.starts_with("n,polar_residual,fiber_gap,fdelta_gap_0.1,"));
}

#[test]
fn run_coarse_quadrature_is_flagged() {
    let o = run(&["run", &path("scenarios/coarse-smooth-x.json")]);
    assert_eq!(code(&o), 1);
    // resolving the same scenario with enough points clears the finding
    assert_eq!(code(&run(&["run", &path("scenarios/coarse-smooth-x.json"), "--quad-order", "4"])), 0);
}

#[test]
fn run_rejects_unresolvable_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"format": "caccioppoli-scenario/1", "family": {"name": "spiral"}, "integrands": ["one"], "seed": 1}"#,
        r#"{"format": "caccioppoli-scenario/1", "family": {"name": "remark"}, "integrands": ["nope"], "seed": 1}"#,
        r#"{"format": "caccioppoli-scenario/1", "family": {"name": "remark"}, "integrands": ["one"], "sed": 1}"#,
        r#"{"format": "caccioppoli-scenario/1", "family": {"name": "remark"}, "integrands": ["one"]}"#,
        r#"{"format": "caccioppoli-scenario/9", "family": {"name": "remark"}, "integrands": ["one"], "seed": 1}"#,
    ];
    for (k, body) in cases.iter().enumerate() {
        let p = dir.path().join(format!("s{k}.json"));
        std::fs::write(&p, body).unwrap();
        assert_eq!(code(&run(&["run", p.to_str().unwrap()])), 2, "{body}");
    }
    // a missing seed can be supplied on the command line
    let p = dir.path().join("s3.json");
    assert_eq!(code(&run(&["run", p.to_str().unwrap(), "--seed", "9"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn run_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["run", &path("scenarios/slab.json"), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "caccioppoli-report/1");
    assert_eq!(v["report"]["family"], "slab");
    assert_eq!(v["report"]["verdict"]["strict"], true);
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn jobs_from_environment() {
    let o = bin().env("CACCIOPPOLI_JOBS", "2").args(["run", &path("scenarios/remark-jump.json")]).output().unwrap();
    assert_eq!(code(&o), 0);
    let bad =
        bin().env("CACCIOPPOLI_JOBS", "many").args(["run", &path("scenarios/remark-jump.json")]).output().unwrap();
    assert_eq!(code(&bad), 2);
}
