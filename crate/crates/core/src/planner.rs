//! Planning methods behind one trait, looked up by name at runtime.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::energy::{solve_trajectory, MinimizerOptions, MinimizerStatus};
use crate::error::{DloError, Result};
use crate::geometry::Trajectory;
use crate::scene::Scene;
use crate::scope::{ScopeProblem, SolveStatus, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SCOPE")]
    Scope,
    EnergyBased,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Scope => "SCOPE",
            Method::EnergyBased => "EnergyBased",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanStatus {
    Converged,
    MaxIterations,
    Infeasible,
    LineSearchFailed,
    /// The planner returned an error; no trajectory.
    Failed,
}

impl PlanStatus {
    pub fn is_converged(self) -> bool {
        self == PlanStatus::Converged
    }
}

impl From<SolveStatus> for PlanStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => PlanStatus::Converged,
            SolveStatus::MaxIterations => PlanStatus::MaxIterations,
            SolveStatus::Infeasible => PlanStatus::Infeasible,
        }
    }
}

impl From<MinimizerStatus> for PlanStatus {
    fn from(s: MinimizerStatus) -> Self {
        match s {
            MinimizerStatus::Converged => PlanStatus::Converged,
            MinimizerStatus::MaxIterations => PlanStatus::MaxIterations,
            MinimizerStatus::LineSearchFailed => PlanStatus::LineSearchFailed,
        }
    }
}

/// Knobs for every registered planner; each reads its own part.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlannerSettings {
    pub scope: SolverSettings,
    pub energy: MinimizerOptions,
}

/// A planned trajectory plus solver bookkeeping. Serializes to the
/// trajectory file format shared by all methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub method: Method,
    pub status: PlanStatus,
    /// SCOPE: `J = w1 S + w2 M`. Energy baseline: final-step `E + lambda E_shape`.
    pub objective: f64,
    pub iterations: usize,
    /// Seconds spent assembling the problem (guide, matrices, model).
    pub assembly_time_s: f64,
    /// Seconds spent solving, excluding assembly.
    pub solve_time_s: f64,
    /// Largest segment excess over the rest length across the trajectory.
    pub max_constraint_violation: f64,
    pub trajectory: Trajectory,
}

pub trait Planner: Send + Sync {
    /// Registry key, e.g. `"scope"`.
    fn name(&self) -> &'static str;

    fn method(&self) -> Method;

    fn plan(&self, scene: &Scene, settings: &PlannerSettings) -> Result<PlanOutcome>;
}

/// The convex program solved by ADMM.
#[derive(Debug, Default, Clone, Copy)]
pub struct ScopePlanner;

impl Planner for ScopePlanner {
    fn name(&self) -> &'static str {
        "scope"
    }

    fn method(&self) -> Method {
        Method::Scope
    }

    fn plan(&self, scene: &Scene, settings: &PlannerSettings) -> Result<PlanOutcome> {
        let clock = Instant::now();
        let problem = ScopeProblem::assemble(
            &scene.start,
            &scene.target,
            scene.params,
            scene.n_steps,
            scene.w1,
            scene.w2,
            None,
        )?;
        let assembly_time_s = clock.elapsed().as_secs_f64();
        let sol = problem.solve(&settings.scope)?;
        Ok(PlanOutcome {
            method: Method::Scope,
            status: sol.status.into(),
            objective: sol.objective_value,
            iterations: sol.iterations,
            assembly_time_s,
            solve_time_s: sol.solve_time,
            max_constraint_violation: sol.max_constraint_violation,
            trajectory: sol.trajectory,
        })
    }
}

/// Quasi-static mass-spring equilibria toward the interpolated shapes.
#[derive(Debug, Default, Clone, Copy)]
pub struct EnergyPlanner;

impl Planner for EnergyPlanner {
    fn name(&self) -> &'static str {
        "energy"
    }

    fn method(&self) -> Method {
        Method::EnergyBased
    }

    fn plan(&self, scene: &Scene, settings: &PlannerSettings) -> Result<PlanOutcome> {
        let clock = Instant::now();
        let ls = scene.params.segment_rest_length();
        let model = scene.energy.model(&scene.start, ls)?;
        let assembly_time_s = clock.elapsed().as_secs_f64();
        let run = solve_trajectory(
            &scene.start,
            &scene.target,
            &model,
            scene.energy.lambda,
            scene.n_steps,
            &settings.energy,
        )?;
        Ok(PlanOutcome {
            method: Method::EnergyBased,
            status: run.status().into(),
            objective: run.final_report.objective,
            iterations: run.iterations(),
            assembly_time_s,
            solve_time_s: run.total_time,
            max_constraint_violation: run.trajectory.max_segment_excess(ls),
            trajectory: run.trajectory,
        })
    }
}

/// Planners keyed by name, in registration order.
pub struct PlannerRegistry {
    planners: Vec<Box<dyn Planner>>,
}

impl PlannerRegistry {
    pub fn empty() -> Self {
        Self {
            planners: Vec::new(),
        }
    }

    /// `scope` and `energy`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ScopePlanner));
        r.register(Box::new(EnergyPlanner));
        r
    }

    /// Add a planner, replacing any existing one with the same name.
    pub fn register(&mut self, planner: Box<dyn Planner>) {
        self.planners.retain(|p| p.name() != planner.name());
        self.planners.push(planner);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Planner> {
        self.planners
            .iter()
            .find(|p| p.name() == name)
            .map(|p| p.as_ref())
            .ok_or_else(|| DloError::UnknownPlanner(name.to_string()))
    }

    pub fn by_method(&self, method: Method) -> Option<&dyn Planner> {
        self.planners
            .iter()
            .find(|p| p.method() == method)
            .map(|p| p.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.planners.iter().map(|p| p.name()).collect()
    }
}

impl Default for PlannerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
