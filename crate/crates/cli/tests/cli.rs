use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracg::funcspace::io::read_csv;
use serde_json::{json, Value};
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn fracg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracg")).args(args).env_remove("FRACG_OUT").output().unwrap()
}

fn run_in(dir: &Path, sub: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    fracg(&args)
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, value.to_string()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_problem(p: f64) -> Value {
    json!({
        "dim": 1, "h": 0.125, "omega": {"shape": "box", "lo": [0.0], "hi": [1.0]}, "s": 0.5,
        "g": {"family": "power", "p": p},
        "data": {"kind": "step", "axis": 0, "at": 0.5, "below": 1.0, "above": 0.0},
        "truncation_radius": 2.0
    })
}

#[test]
fn constant_data_gives_a_constant_minimizer() {
    let out = TempDir::new().unwrap();
    let o = run_in(out.path(), "solve", &config("constant.json"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&out.path().join("SolveReport.json"));
    assert_eq!(rep["converged"], true);
    let residual = rep["residual_norm"].as_f64().unwrap();
    let u = read_csv(fs::File::open(out.path().join("minimizer.csv")).unwrap()).unwrap();
    let dev = u.values.iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
    assert!(dev <= 10.0 * residual.sqrt(), "{dev}");
}

#[test]
fn linear_oracle_stage_agrees() {
    let out = TempDir::new().unwrap();
    let o = run_in(out.path(), "solve", &config("linear_oracle.json"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let oracle = read_json(&out.path().join("oracle.json"));
    assert_eq!(oracle["interior_nodes"], 32);
    assert!(oracle["sup_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(oracle["pass"], true);
}

#[test]
fn unknown_estimate_is_a_schema_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &json!({"problem": small_problem(2.0), "pipeline": ["verify:missing"]}));
    let o = run_in(&dir.path().join("out"), "run", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown estimate"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn random_stages_need_a_seed_which_the_flag_supplies() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "problem": small_problem(2.0),
            "pipeline": ["verify:dg"],
            "estimates": {"dg": {"kind": "de_giorgi", "cases": 20}}
        }),
    );
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, "verify", &cfg, &[]).status.code(), Some(2));
    assert_eq!(run_in(&out, "verify", &cfg, &["--seed", "5"]).status.code(), Some(0));
    let rep = read_json(&out.join("estimate_dg.json"));
    assert_eq!(rep["kind"], "de_giorgi");
    assert_eq!(rep["reports"][1]["violations"], 0);
    assert!(!out.join("SolveReport.json").exists());
}

#[test]
fn non_convergence_exits_3_with_the_last_iterate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({"problem": small_problem(3.0), "solver": {"max_iter": 1, "tol": 1e-14}, "pipeline": ["solve"]}),
    );
    let out = dir.path().join("out");
    let o = run_in(&out, "solve", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(read_json(&out.join("SolveReport.json"))["converged"], false);
    assert!(out.join("minimizer.csv").exists());
}

#[test]
fn tol_flag_overrides_the_solver_tolerance() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({"problem": small_problem(3.0), "solver": {"max_iter": 3, "tol": 1e-14}, "pipeline": ["solve"]}),
    );
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, "solve", &cfg, &["--tol", "0.5"]).status.code(), Some(0));
}

#[test]
fn failed_estimate_exits_4_and_still_writes_its_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "problem": small_problem(2.0),
            "pipeline": ["verify:ball", "verify:ball2"],
            "estimates": {
                "ball": {"kind": "boundedness", "center": [0.5], "radius": 0.25},
                "ball2": {"kind": "boundedness", "center": [0.5], "radius": 0.4}
            },
            "bounds": {"boundedness": 1e-6}
        }),
    );
    let out = dir.path().join("out");
    let o = run_in(&out, "verify", &cfg, &[]);
    assert_eq!(o.status.code(), Some(4));
    for name in ["ball", "ball2"] {
        let rep = read_json(&out.join(format!("estimate_{name}.json")));
        assert_eq!(rep["pass"], false);
        assert_eq!(rep["reports"][0]["constant_bound"], 1e-6);
    }
}

#[test]
fn unwritable_output_exits_5() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run_in(&blocker.join("sub"), "solve", &config("constant.json"), &[]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn output_dir_defaults_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fracg"))
        .args(["solve", config("constant.json").to_str().unwrap()])
        .env("FRACG_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("SolveReport.json").exists());
}

#[test]
fn subcommands_select_their_stages() {
    let out = TempDir::new().unwrap();
    let cfg = config("regularity.json");
    assert_eq!(run_in(out.path(), "sweep", &cfg, &[]).status.code(), Some(0));
    let mut names: Vec<String> =
        fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["SolveReport.json", "minimizer.csv", "sweep_balls.csv"]);
    let csv = fs::read_to_string(out.path().join("sweep_balls.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with(
        "point,radius,report,pass,lhs,empirical_constant,constant_bound,samples,violations,rhs_average,rhs_tail,"
    ));
    assert_eq!(lines.count(), 5);
}

#[test]
fn schema_is_printed_as_json() {
    let o = fracg(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["required"], json!(["problem", "pipeline"]));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for cfg in ["regularity.json", "logarithmic.json"] {
        assert_eq!(run_in(a.path(), "run", &config(cfg), &["--jobs", "1"]).status.code(), Some(0));
        assert_eq!(run_in(b.path(), "run", &config(cfg), &["--jobs", "4"]).status.code(), Some(0));
    }
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.len(), 12);
    assert_eq!(sa, sb);
}
