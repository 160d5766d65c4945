//! The convex trajectory program.
//!
//! Decision variables are every node position at every time step. The
//! objective is
//!
//! ```text
//! J = w1 * sum_{t=1}^{T-1} sum_{i=1}^{N} |p(i,t+1) - p(i,t)|^2
//!   + w2 * sum_{t=2}^{T-1} sum_{i=2}^{N-1} |p(i,t) - guide(i,t)|^2
//! ```
//!
//! minimized subject to `p(:,1) = start`, `p(:,T) = target`, and the
//! second-order cone `|p(i+1,t) - p(i,t)| <= l0` on every segment at every
//! step. The boundary steps are substituted as constants, so they are met
//! exactly rather than to solver tolerance.

mod admm;
mod banded;

pub use admm::{ResidualSample, SolveTrace};

use serde::{Deserialize, Serialize};

use crate::error::{DloError, Result};
use crate::geometry::{build_guide, Configuration, DloParams, Point2, Trajectory};

/// Slack allowed on boundary segments before a scene is declared infeasible.
pub const BOUNDARY_SLACK: f64 = 1e-9;

pub const DEFAULT_W1: f64 = 1.0;
pub const DEFAULT_W2: f64 = 0.1;

/// Sum over steps and nodes of the squared per-step node displacement.
pub fn smoothness_objective(traj: &Trajectory) -> f64 {
    traj.steps()
        .windows(2)
        .map(|w| {
            w[0].nodes()
                .iter()
                .zip(w[1].nodes())
                .map(|(a, b)| (*b - *a).norm_squared())
                .sum::<f64>()
        })
        .sum()
}

/// Squared deviation from `guide` over interior nodes at interior steps.
pub fn midpoint_objective(traj: &Trajectory, guide: &Trajectory) -> Result<f64> {
    guide.check_shape(traj.n_nodes(), traj.len())?;
    let t_last = traj.len() - 1;
    let i_last = traj.n_nodes() - 1;
    let mut total = 0.0;
    for t in 1..t_last {
        let (c, g) = (traj.step(t), guide.step(t));
        for i in 1..i_last {
            total += (c.node(i) - g.node(i)).norm_squared();
        }
    }
    Ok(total)
}

/// An assembled planning problem; see the module docs for the program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeProblem {
    params: DloParams,
    start: Configuration,
    target: Configuration,
    guide: Trajectory,
    w1: f64,
    w2: f64,
    /// Prescribed first/last node positions for steps `2..T-1`, if the
    /// grippers follow fixed waypoints instead of being left free.
    gripper_waypoints: Option<Vec<(Point2, Point2)>>,
}

impl ScopeProblem {
    /// Validate and assemble. When `guide` is `None` the per-node straight
    /// line guide is used.
    pub fn assemble(
        start: &Configuration,
        target: &Configuration,
        params: DloParams,
        n_steps: usize,
        w1: f64,
        w2: f64,
        guide: Option<Trajectory>,
    ) -> Result<Self> {
        let n = params.n_nodes();
        start.check_nodes(n)?;
        target.check_nodes(n)?;
        if n_steps < 2 {
            return Err(DloError::InvalidInput(format!(
                "T must be at least 2, got {n_steps}"
            )));
        }
        if !(w1.is_finite() && w2.is_finite()) {
            return Err(DloError::NonFinite("objective weights"));
        }
        if w1 < 0.0 || w2 < 0.0 || w1 + w2 <= 0.0 {
            return Err(DloError::InvalidInput(format!(
                "weights must be non-negative with a positive sum, got w1={w1}, w2={w2}"
            )));
        }
        let limit = params.segment_rest_length();
        for (shape, c) in [("start", start), ("target", target)] {
            if let Some((k, len)) = c
                .segment_lengths()
                .into_iter()
                .enumerate()
                .find(|(_, l)| *l > limit + BOUNDARY_SLACK)
            {
                return Err(DloError::InfeasibleBoundary {
                    shape,
                    segment: k + 1,
                    length: len,
                    limit,
                });
            }
        }
        let guide = match guide {
            Some(g) => {
                g.check_shape(n, n_steps)?;
                if g.first() != start || g.last() != target {
                    return Err(DloError::InvalidInput(
                        "guide must begin at the start shape and end at the target shape".into(),
                    ));
                }
                g
            }
            None => build_guide(start, target, n_steps)?,
        };
        Ok(Self {
            params,
            start: start.clone(),
            target: target.clone(),
            guide,
            w1,
            w2,
            gripper_waypoints: None,
        })
    }

    /// Pin the first and last node at each interior step to the given
    /// positions (`T - 2` pairs, for steps 2 through T-1).
    pub fn with_gripper_waypoints(mut self, waypoints: Vec<(Point2, Point2)>) -> Result<Self> {
        let interior = self.n_steps() - 2;
        if waypoints.len() != interior {
            return Err(DloError::StepCountMismatch {
                expected: interior,
                found: waypoints.len(),
            });
        }
        let reach = self.params.total_rest_length();
        for (k, (a, b)) in waypoints.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(DloError::NonFinite("gripper waypoints"));
            }
            if a.distance(*b) > reach + BOUNDARY_SLACK {
                return Err(DloError::InvalidInput(format!(
                    "gripper waypoints at step {} are {:.6} m apart, beyond the object's length {:.6} m",
                    k + 2,
                    a.distance(*b),
                    reach
                )));
            }
        }
        self.gripper_waypoints = Some(waypoints);
        Ok(self)
    }

    pub fn params(&self) -> &DloParams {
        &self.params
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    pub fn target(&self) -> &Configuration {
        &self.target
    }

    pub fn guide(&self) -> &Trajectory {
        &self.guide
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.w1, self.w2)
    }

    pub fn n_steps(&self) -> usize {
        self.guide.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.params.n_nodes()
    }

    pub fn gripper_waypoints(&self) -> Option<&[(Point2, Point2)]> {
        self.gripper_waypoints.as_deref()
    }

    /// Scalar decision variables before elimination: `2 N T`.
    pub fn n_decision_variables(&self) -> usize {
        2 * self.n_nodes() * self.n_steps()
    }

    /// Segment cones, one per segment per step: `(N - 1) T`.
    pub fn n_cones(&self) -> usize {
        (self.n_nodes() - 1) * self.n_steps()
    }

    /// Scalar rows entering the cones, two per segment: `2 (N - 1) T`.
    pub fn n_cone_rows(&self) -> usize {
        2 * self.n_cones()
    }

    /// Scalar equalities fixing coordinates: `4 N` for the boundary shapes,
    /// plus four per interior step when gripper waypoints are pinned.
    pub fn n_equalities(&self) -> usize {
        let pinned = if self.gripper_waypoints.is_some() {
            4 * (self.n_steps() - 2)
        } else {
            0
        };
        4 * self.n_nodes() + pinned
    }

    /// `J = w1 S + w2 M` evaluated on any candidate trajectory.
    pub fn objective_value(&self, traj: &Trajectory) -> Result<f64> {
        traj.check_shape(self.n_nodes(), self.n_steps())?;
        Ok(self.w1 * smoothness_objective(traj) + self.w2 * midpoint_objective(traj, &self.guide)?)
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<ScopeSolution> {
        admm::solve(self, settings, false).map(|(sol, _)| sol)
    }

    /// Like [`solve`](Self::solve), also recording residuals per iteration.
    pub fn solve_traced(&self, settings: &SolverSettings) -> Result<(ScopeSolution, SolveTrace)> {
        admm::solve(self, settings, true)
    }
}

/// Where the ADMM iterates start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    /// Interior positions start on the guide trajectory.
    #[default]
    Guide,
    /// Interior positions, splitting variables and duals all start at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Largest allowed per-segment gap between the trajectory and its
    /// projection onto the length balls, in meters.
    pub primal_tolerance: f64,
    /// Largest allowed stationarity residual (infinity norm).
    pub dual_tolerance: f64,
    pub penalty_rho: f64,
    pub over_relaxation: f64,
    #[serde(default)]
    pub warm_start: WarmStart,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            primal_tolerance: 1e-6,
            dual_tolerance: 1e-6,
            penalty_rho: 1.0,
            over_relaxation: 1.6,
            warm_start: WarmStart::Guide,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.primal_tolerance,
            self.dual_tolerance,
            self.penalty_rho,
            self.over_relaxation,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(DloError::NonFinite("solver settings"));
        }
        if self.max_iterations < 1 {
            return Err(DloError::InvalidInput("max_iterations must be at least 1".into()));
        }
        if self.primal_tolerance <= 0.0 || self.dual_tolerance <= 0.0 {
            return Err(DloError::InvalidInput("tolerances must be positive".into()));
        }
        if self.penalty_rho <= 0.0 {
            return Err(DloError::InvalidInput("penalty_rho must be positive".into()));
        }
        if !(1.0..=1.8).contains(&self.over_relaxation) {
            return Err(DloError::InvalidInput(format!(
                "over_relaxation must lie in [1, 1.8], got {}",
                self.over_relaxation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeSolution {
    pub trajectory: Trajectory,
    pub objective_value: f64,
    pub iterations: usize,
    /// Largest segment excess over the rest length, in meters.
    pub max_constraint_violation: f64,
    pub status: SolveStatus,
    /// Wall-clock seconds spent factorizing and iterating.
    pub solve_time: f64,
}
