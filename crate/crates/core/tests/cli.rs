use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_orlicz");

fn base(phi: &str, subspace: &str, target: &str) -> String {
    format!(
        "seed = 11\n\n[phi]\n{phi}\n\n[grid]\na = 0.0\nb = 1.0\nn_nodes = 1001\n\n[subspace]\n{subspace}\n\n[target]\n{target}\n"
    )
}

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.toml");
    fs::write(&path, config).unwrap();
    Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env_remove("ORLICZ_OUT_DIR")
        .output()
        .unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SQUARE: &str = "family = \"power\"\np = 2.0";
const CONSTANTS: &str = "family = \"monomial\"\nn = 1";
const IDENTITY: &str = "family = \"polynomial\"\ncoeffs = [0.0, 1.0]";

#[test]
fn solve_mean_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "solve", &base(SQUARE, CONSTANTS, IDENTITY), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = json(dir.path(), "solution.json");
    let c = doc["result"]["coeffs"][0].as_f64().unwrap();
    assert!((c - 0.5).abs() < 1e-3);
    assert_eq!(doc["config"]["seed"], 11);
    assert!(doc["config"]["grid"]["equality_tol"].as_f64().unwrap() > 0.0);
    assert!(doc["version"].is_string());
    let table = fs::read_to_string(dir.path().join("out/residuals.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("node,f,P,residual"));
    assert_eq!(table.lines().count(), 1002);
}

#[test]
fn solve_span_target_and_missing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lines = "family = \"monomial\"\nn = 2";
    let cfg = base("family = \"power\"\np = 1.0", lines, "family = \"span\"\ncoeffs = [0.3, -0.7]");
    let o = run(dir.path(), "solve", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json(dir.path(), "solution.json")["result"]["modular_value"].as_f64().unwrap() < 1e-10);

    let cfg = base(SQUARE, CONSTANTS, "family = \"csv\"\npath = \"/nonexistent/f.csv\"");
    let o = run(dir.path(), "solve", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nonexistent"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let typo = base(SQUARE, CONSTANTS, IDENTITY) + "\n[solver]\ntol_objective = 1e-3\n";
    let o = run(dir.path(), "solve", &typo, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tol_objective"), "{}", stderr(&o));

    let unseeded = base(SQUARE, CONSTANTS, IDENTITY).replace("seed = 11\n", "");
    let o = run(dir.path(), "solve", &unseeded, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"));
    let o = run(dir.path(), "solve", &unseeded, &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(dir.path(), "solution.json")["config"]["seed"], 3);
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = base(SQUARE, CONSTANTS, IDENTITY) + "\n[certify]\ncoeffs = [0.5]\n";
    let o = run(dir.path(), "certify", &good, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(dir.path(), "certificate.json")["result"]["verdict"], true);

    let bad = base(SQUARE, CONSTANTS, IDENTITY) + "\n[certify]\ncoeffs = [0.6]\n";
    let o = run(dir.path(), "certify", &bad, &[]);
    assert_eq!(o.status.code(), Some(3));
    let doc = json(dir.path(), "certificate.json");
    let margins: Vec<f64> = doc["result"]["directions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["margin"].as_f64().unwrap())
        .collect();
    assert!(margins.iter().any(|&m| m < -0.1));

    let exact = base(SQUARE, CONSTANTS, "family = \"polynomial\"\ncoeffs = [0.25]") + "\n[certify]\ncoeffs = [0.25]\n";
    let o = run(dir.path(), "certify", &exact, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unique_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let convex = base(
        SQUARE,
        "family = \"monomial\"\nn = 3",
        "family = \"sine\"\nfrequency = 3.0",
    ) + "\n[unique]\nn_starts = 8\n";
    let o = run(dir.path(), "unique", &convex, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(dir.path(), "uniqueness.json")["result"]["verdict"]["verdict"], "singleton");

    let plateau = base(
        "family = \"power\"\np = 1.0",
        CONSTANTS,
        "family = \"step\"\nat = 0.5\nleft = -1.0\nright = 1.0",
    )
    .replace("n_nodes = 1001", "n_nodes = 1000");
    let o = run(dir.path(), "unique", &plateau, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(dir.path(), "uniqueness.json")["result"]["verdict"]["verdict"], "multiple");

    let starved = base(
        "family = \"power\"\np = 1.0",
        "family = \"monomial\"\nn = 3",
        "family = \"sine\"\nfrequency = 3.0",
    ) + "\n[solver]\nmax_iters = 1\n\n[unique]\nn_starts = 4\n";
    let o = run(dir.path(), "unique", &starved, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(json(dir.path(), "uniqueness.json")["result"]["verdict"]["verdict"], "inconclusive");
}

#[test]
fn unique_jump_suite_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base(
        "family = \"staircase\"\ndyadic = 8\nbase = { family = \"power\", p = 1.0 }",
        "family = \"hat\"\nknots = [0.0, 1.0]",
        IDENTITY,
    ) + "\n[unique]\nmode = \"jump_suite\"\nn_instances = 2\nn_starts = 8\n";
    let o = run(dir.path(), "unique", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("out/suite.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("instance,theorem_tag,verdict,diameter"));
    assert_eq!(json(dir.path(), "uniqueness.json")["result"]["suite_pass"], true);
}

fn witness_config(phi: &str, p3: f64) -> String {
    // f = p1 + 0.4·(4t² − 1)/3 with t = 2x − 1 and p1 = 0.2 + 0.1x
    let k = 0.4 / 3.0;
    let target = format!(
        "family = \"polynomial\"\ncoeffs = [{}, {}, {}]",
        0.2 + 3.0 * k,
        0.1 - 16.0 * k,
        16.0 * k
    );
    base(phi, "family = \"monomial\"\nn = 2", &target).replace("n_nodes = 1001", "n_nodes = 2000")
        + &format!("\n[witness]\np3_coeffs = [{p3}, 0.0]\np1_coeffs = [0.2, 0.1]\n")
}

#[test]
fn witness_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ltc = "family = \"linear_then_convex\"\nk = 1.0\nc = 1.0\np = 2.0";
    let o = run(dir.path(), "witness", &witness_config(ltc, 0.3), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = json(dir.path(), "witness.json");
    assert!(doc["result"]["witness"]["modular_gap"].as_f64().unwrap() <= 1e-8);
    assert_eq!(doc["result"]["witness"]["epsilons"].as_array().unwrap().len(), 9);

    let o = run(dir.path(), "witness", &witness_config(ltc, 0.6), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("c/2"), "{}", stderr(&o));

    let o = run(dir.path(), "witness", &witness_config(SQUARE, 0.3), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("affine"), "{}", stderr(&o));
}

#[test]
fn outputs_are_deterministic_and_env_dir_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base(
        "family = \"linear_then_convex\"\nk = 1.0\nc = 1.0\np = 2.0",
        "family = \"monomial\"\nn = 2",
        "family = \"random\"\namplitude = 1.0",
    );
    run(dir.path(), "solve", &cfg, &[]);
    let first = fs::read(dir.path().join("out/solution.json")).unwrap();
    run(dir.path(), "solve", &cfg, &[]);
    assert_eq!(first, fs::read(dir.path().join("out/solution.json")).unwrap());

    let env_dir = dir.path().join("from-env");
    let path = dir.path().join("config.toml");
    let o = Command::new(BIN)
        .args(["solve", "--quiet", "--config"])
        .arg(&path)
        .env("ORLICZ_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(first, fs::read(env_dir.join("solution.json")).unwrap());
}
