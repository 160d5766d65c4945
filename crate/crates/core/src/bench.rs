//! Side-by-side benchmark of the registered planners.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyConfig, MinimizerOptions};
use crate::error::{DloError, Result};
use crate::geometry::{max_length_error, shape_error, DloParams, ShapeKind, ShapeSpec, Trajectory};
use crate::planner::{Method, PlanStatus, Planner, PlannerRegistry, PlannerSettings};
use crate::scene::{Scene, DEFAULT_STEPS};
use crate::scope::{SolverSettings, DEFAULT_W1, DEFAULT_W2};

pub const DEFAULT_REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTask {
    pub name: String,
    pub start_spec: ShapeSpec,
    pub target_spec: ShapeSpec,
    #[serde(rename = "T")]
    pub n_steps: usize,
    pub w1: f64,
    pub w2: f64,
    pub energy: EnergyConfig,
    pub scope_settings: SolverSettings,
    pub energy_opts: MinimizerOptions,
    pub repeats: usize,
}

impl BenchTask {
    pub fn new(name: impl Into<String>, start_spec: ShapeSpec, target_spec: ShapeSpec) -> Self {
        Self {
            name: name.into(),
            start_spec,
            target_spec,
            n_steps: DEFAULT_STEPS,
            w1: DEFAULT_W1,
            w2: DEFAULT_W2,
            energy: EnergyConfig::default(),
            scope_settings: SolverSettings::default(),
            energy_opts: MinimizerOptions::default(),
            repeats: DEFAULT_REPEATS,
        }
    }

    pub fn from_scene(name: impl Into<String>, scene: &Scene) -> Self {
        Self {
            n_steps: scene.n_steps,
            w1: scene.w1,
            w2: scene.w2,
            energy: scene.energy,
            ..Self::new(name, scene.start_spec, scene.target_spec)
        }
    }

    pub fn scene(&self) -> Result<Scene> {
        if self.repeats < 1 {
            return Err(DloError::InvalidInput("repeats must be at least 1".into()));
        }
        Scene::new(
            self.start_spec,
            self.target_spec,
            self.n_steps,
            self.w1,
            self.w2,
            self.energy,
        )
    }

    fn settings(&self) -> PlannerSettings {
        PlannerSettings {
            scope: self.scope_settings,
            energy: self.energy_opts,
        }
    }
}

/// The four standard shape transitions at desk scale (15 nodes, 5 cm
/// segments, 10 steps). Placements are chosen so that start and target
/// turn the same way.
pub fn standard_suite() -> Vec<BenchTask> {
    let n = DloParams::DEFAULT_N_NODES;
    let ls = DloParams::DEFAULT_SEGMENT_LENGTH;
    let deg = PI / 180.0;
    let shape = |kind| ShapeSpec::new(kind, n, ls);
    vec![
        BenchTask::new(
            "QSW-HSW",
            shape(ShapeKind::Qsw),
            shape(ShapeKind::Hsw).rotated(25.0 * deg),
        ),
        BenchTask::new("I-S", shape(ShapeKind::I), shape(ShapeKind::S)),
        BenchTask::new(
            "U-QSW",
            shape(ShapeKind::U),
            shape(ShapeKind::Qsw).mirrored(true).rotated(25.0 * deg),
        ),
        BenchTask::new(
            "QSW-L",
            shape(ShapeKind::Qsw),
            shape(ShapeKind::L).mirrored(true).rotated(70.0 * deg),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub task: String,
    pub method: Method,
    /// Median wall-clock seconds over the repeats, assembly included.
    pub solve_time: f64,
    /// Median seconds of that spent on assembly.
    pub assembly_time: f64,
    pub max_length_error: f64,
    /// Sum of squared node distances between the last step and the target.
    pub final_shape_error: f64,
    /// Largest single node distance between the last step and the target.
    pub final_max_node_error: f64,
    pub max_constraint_violation: f64,
    pub objective: f64,
    pub iterations: usize,
    pub status: PlanStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

impl BenchResult {
    fn failed(task: &str, method: Method, err: &DloError) -> Self {
        Self {
            task: task.to_string(),
            method,
            solve_time: f64::NAN,
            assembly_time: f64::NAN,
            max_length_error: f64::NAN,
            final_shape_error: f64::NAN,
            final_max_node_error: f64::NAN,
            max_constraint_violation: f64::NAN,
            objective: f64::NAN,
            iterations: 0,
            status: PlanStatus::Failed,
            error: Some(err.to_string()),
            trajectory: None,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Run one planner on `scene` `repeats` times; the trajectory of the last run
/// is kept (runs are deterministic).
pub fn measure(
    task_name: &str,
    planner: &dyn Planner,
    scene: &Scene,
    settings: &PlannerSettings,
    repeats: usize,
) -> BenchResult {
    let method = planner.method();
    let mut times = Vec::with_capacity(repeats);
    let mut assembly = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let clock = Instant::now();
        let outcome = planner.plan(scene, settings);
        times.push(clock.elapsed().as_secs_f64());
        match outcome {
            Ok(o) => {
                assembly.push(o.assembly_time_s);
                last = Some(o);
            }
            Err(e) => return BenchResult::failed(task_name, method, &e),
        }
    }
    let out = last.expect("at least one repeat");
    let result = (|| -> Result<BenchResult> {
        let final_step = out.trajectory.last();
        let final_max_node_error = final_step
            .nodes()
            .iter()
            .zip(scene.target.nodes())
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        Ok(BenchResult {
            task: task_name.to_string(),
            method,
            solve_time: median(times),
            assembly_time: median(assembly),
            max_length_error: max_length_error(&out.trajectory, &scene.params)?,
            final_shape_error: shape_error(final_step, &scene.target)?,
            final_max_node_error,
            max_constraint_violation: out.max_constraint_violation,
            objective: out.objective,
            iterations: out.iterations,
            status: out.status,
            error: None,
            trajectory: Some(out.trajectory.clone()),
        })
    })();
    result.unwrap_or_else(|e| BenchResult::failed(task_name, method, &e))
}

/// Run SCOPE and the energy baseline on the task's scene, sequentially.
pub fn run(task: &BenchTask) -> (BenchResult, BenchResult) {
    run_with(task, &PlannerRegistry::builtin())
}

pub fn run_with(task: &BenchTask, registry: &PlannerRegistry) -> (BenchResult, BenchResult) {
    let scene = match task.scene() {
        Ok(s) => s,
        Err(e) => {
            return (
                BenchResult::failed(&task.name, Method::Scope, &e),
                BenchResult::failed(&task.name, Method::EnergyBased, &e),
            )
        }
    };
    let settings = task.settings();
    let side = |method| match registry.by_method(method) {
        Some(p) => measure(&task.name, p, &scene, &settings, task.repeats),
        None => BenchResult::failed(
            &task.name,
            method,
            &DloError::UnknownPlanner(method.to_string()),
        ),
    };
    let scope = side(Method::Scope);
    let energy = side(Method::EnergyBased);
    (scope, energy)
}

/// Run every task, across at most `threads` worker threads. Each task's two
/// methods still run back to back on one thread.
pub fn run_suite(tasks: &[BenchTask], threads: usize) -> Vec<(BenchResult, BenchResult)> {
    if threads <= 1 {
        return tasks.iter().map(run).collect();
    }
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| tasks.par_iter().map(run).collect()),
        Err(_) => tasks.iter().map(run).collect(),
    }
}

pub const TABLE_HEADER: [&str; 6] = [
    "task",
    "scope_time_s",
    "scope_max_err_m",
    "energy_time_s",
    "energy_max_err_m",
    "speedup",
];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub task: String,
    pub scope_time_s: f64,
    pub scope_max_err_m: f64,
    pub energy_time_s: f64,
    pub energy_max_err_m: f64,
    pub speedup: f64,
}

impl TableRow {
    pub fn from_results(scope: &BenchResult, energy: &BenchResult) -> Self {
        Self {
            task: scope.task.clone(),
            scope_time_s: scope.solve_time,
            scope_max_err_m: scope.max_length_error,
            energy_time_s: energy.solve_time,
            energy_max_err_m: energy.max_length_error,
            speedup: energy.solve_time / scope.solve_time,
        }
    }
}

/// Four significant digits, exponent form.
pub fn sig4(v: f64) -> String {
    format!("{v:.3e}")
}

/// CSV comparison table, one row per task.
pub fn emit_table(results: &[(BenchResult, BenchResult)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER).expect("in-memory write");
    for (s, e) in results {
        let r = TableRow::from_results(s, e);
        w.write_record([
            r.task.clone(),
            sig4(r.scope_time_s),
            sig4(r.scope_max_err_m),
            sig4(r.energy_time_s),
            sig4(r.energy_max_err_m),
            sig4(r.speedup),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| DloError::InvalidInput(format!("csv header: {e}")))?;
    if header.iter().ne(TABLE_HEADER) {
        return Err(DloError::InvalidInput(format!(
            "unexpected csv header {header:?}"
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| DloError::InvalidInput(format!("csv row: {e}"))))
        .collect()
}

/// Human-readable table with errors in both meters and centimeters.
pub fn format_report(results: &[(BenchResult, BenchResult)]) -> String {
    let mut out = format!(
        "{:<8} {:>12} {:>11} {:>9} {:>12} {:>11} {:>9} {:>9}\n",
        "task", "scope_s", "scope_m", "scope_cm", "energy_s", "energy_m", "energy_cm", "speedup"
    );
    for (s, e) in results {
        out.push_str(&format!(
            "{:<8} {:>12.4e} {:>11.4e} {:>9.3} {:>12.4e} {:>11.4e} {:>9.3} {:>9.1}\n",
            s.task,
            s.solve_time,
            s.max_length_error,
            s.max_length_error * 100.0,
            e.solve_time,
            e.max_length_error,
            e.max_length_error * 100.0,
            e.solve_time / s.solve_time,
        ));
    }
    out
}
