use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scope_dlo::scope::ScopeProblem;
use scope_dlo::{Scene, Trajectory};
use tempfile::TempDir;

const QSW_HSW: &str = r#"{
  "n_nodes": 15, "segment_length": 0.05, "T": 10,
  "start": {"kind": "QSW", "origin": [0, 0]},
  "target": {"kind": "HSW", "origin": [0, 0], "rotation": 0.436}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scope-dlo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Every failure is a single `error:` line.
fn assert_error(o: &Output, code: i32, needle: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with("error: "), "{err}");
    assert!(err.contains(needle), "{err:?} lacks {needle:?}");
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_writes_solution_json() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", QSW_HSW);
    let out = dir.path().join("traj.json");
    let o = run(&["plan", s(&scene), "--method", "scope", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("status=Converged"));

    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["status", "objective", "iterations", "solve_time_s", "max_constraint_violation", "trajectory"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "Converged");
    let t = v["trajectory"].as_array().unwrap();
    assert_eq!(t.len(), 10);
    assert_eq!(t[0].as_array().unwrap().len(), 15);
    assert_eq!(t[0][0].as_array().unwrap().len(), 2);

    // Re-scoring the written trajectory reproduces the reported objective.
    let traj: Trajectory = serde_json::from_value(v["trajectory"].clone()).unwrap();
    let sc = Scene::from_json(QSW_HSW).unwrap();
    let problem =
        ScopeProblem::assemble(&sc.start, &sc.target, sc.params, sc.n_steps, sc.w1, sc.w2, None).unwrap();
    let j = problem.objective_value(&traj).unwrap();
    assert!((j - v["objective"].as_f64().unwrap()).abs() <= 1e-9);
}

#[test]
fn plan_both_writes_two_files() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", QSW_HSW);
    let out = dir.path().join("run.json");
    let o = run(&["plan", s(&scene), "--method", "both", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("run.scope.json").exists());
    assert!(dir.path().join("run.energy.json").exists());
    assert!(!out.exists());
}

#[test]
fn plan_reports_iteration_cap() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "scene.json", QSW_HSW);
    let out = dir.path().join("t.json");
    let o = run(&[
        "plan", s(&scene), "--out", s(&out), "--warm-start", "zero", "--max-iters", "3", "--rho", "2", "--tol", "1e-8",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("MaxIterations"));
    assert!(out.exists());
}

#[test]
fn plan_input_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.json");

    let two_nodes = QSW_HSW.replace("\"n_nodes\": 15", "\"n_nodes\": 2").replace("HSW", "S");
    let scene = write(&dir, "two.json", &two_nodes);
    assert_error(&run(&["plan", s(&scene), "--out", s(&out)]), 1, "n_nodes >= 3");

    let scene = write(&dir, "bad.json", "{\n  \"n_nodes\": 15,\n  oops\n}");
    assert_error(&run(&["plan", s(&scene), "--out", s(&out)]), 1, "line 3");

    let missing = dir.path().join("absent.json");
    assert_error(&run(&["plan", s(&missing), "--out", s(&out)]), 1, "cannot read");

    let scene = write(&dir, "scene.json", QSW_HSW);
    assert_error(&run(&["plan", s(&scene), "--out", s(&out), "--rho=-1"]), 1, "penalty_rho");
    assert_error(&run(&["plan", s(&scene), "--out", s(&out), "--method", "magic"]), 1, "magic");
    assert_error(&run(&["plan"]), 1, "required");
    assert!(!out.exists());
}

#[test]
fn bench_standard_suite() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("r.json");
    let o = run(&["bench", "--suite", "standard", "--repeats", "1", "--out", s(&csv), "--json", s(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let rows = scope_dlo::bench::parse_table(&text).unwrap();
    let names: Vec<_> = rows.iter().map(|r| r.task.as_str()).collect();
    assert_eq!(names, ["QSW-HSW", "I-S", "U-QSW", "QSW-L"]);
    // Human table on stdout when the CSV goes to a file.
    assert!(stdout(&o).contains("scope_cm"));

    let dump: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let entries = dump.as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert!(entries.iter().all(|e| e["trajectory"].as_array().unwrap().len() == 10));

    // More repeats change only timings.
    let csv2 = dir.path().join("t2.csv");
    let o = bin()
        .args(["bench", "--suite", "standard", "--repeats", "3", "--out", s(&csv2)])
        .env("SCOPE_DLO_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows2 = scope_dlo::bench::parse_table(&fs::read_to_string(&csv2).unwrap()).unwrap();
    for (a, b) in rows.iter().zip(&rows2) {
        assert_eq!(a.task, b.task);
        assert_eq!(a.scope_max_err_m, b.scope_max_err_m);
        assert_eq!(a.energy_max_err_m, b.energy_max_err_m);
    }
}

#[test]
fn bench_single_scene_to_stdout() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "mine.json", QSW_HSW);
    let o = run(&["bench", "--scene", s(&scene), "--repeats", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = scope_dlo::bench::parse_table(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].task, "mine");
}

#[test]
fn bench_argument_errors() {
    assert_error(&run(&["bench"]), 1, "--suite");
    assert_error(&run(&["bench", "--suite", "standard", "--repeats", "0"]), 1, "repeats");
    let o = bin()
        .args(["bench", "--suite", "standard", "--repeats", "1"])
        .env("SCOPE_DLO_THREADS", "lots")
        .output()
        .unwrap();
    assert_error(&o, 1, "SCOPE_DLO_THREADS");
}

fn planned(dir: &TempDir) -> (PathBuf, PathBuf) {
    let scene = write(dir, "scene.json", QSW_HSW);
    let out = dir.path().join("p.json");
    let o = run(&["plan", s(&scene), "--method", "both", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    (dir.path().join("p.scope.json"), dir.path().join("p.energy.json"))
}

#[test]
fn render_overlay_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (scope, energy) = planned(&dir);
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for out in [&a, &b] {
        let o = run(&["render", s(&scope), s(&energy), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let svg = fs::read(&a).unwrap();
    assert_eq!(svg, fs::read(&b).unwrap());
    let text = String::from_utf8(svg).unwrap();
    roxmltree::Document::parse(&text).unwrap();
    assert_eq!(text.matches("stroke-dasharray=\"6,4\"").count(), 1);
    assert_eq!(text.matches("<polyline").count(), 20);
}

#[test]
fn render_constant_trajectory_with_style() {
    let dir = TempDir::new().unwrap();
    let step = "[[0,0],[0.05,0],[0.1,0]]";
    let traj = write(&dir, "c.json", &format!("[{step},{step},{step},{step}]"));
    let style = write(&dir, "style.json", r##"{"intermediate_color": "#000000", "canvas_size": 300}"##);
    let out = dir.path().join("c.svg");
    let o = run(&["render", s(&traj), "--style", s(&style), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    roxmltree::Document::parse(&text).unwrap();
    assert_eq!(text.matches("<polyline").count(), 4);
    assert!(text.contains("#000000"));

    let bad_style = write(&dir, "bad.json", r#"{"start_color": "red"}"#);
    assert_error(&run(&["render", s(&traj), "--style", s(&bad_style), "--out", s(&out)]), 1, "start_color");
}

#[test]
fn render_rejects_mismatched_nodes() {
    let dir = TempDir::new().unwrap();
    let (scope, _) = planned(&dir);
    let short = write(&dir, "short.json", "[[[0,0],[1,0]],[[0,0],[0,1]]]");
    let out = dir.path().join("x.svg");
    assert_error(&run(&["render", s(&scope), s(&short), "--out", s(&out)]), 1, "node count mismatch");
    assert!(!out.exists());
}
