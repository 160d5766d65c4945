use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::minimize::{minimize, MinimizerOptions, MinimizerStats, MinimizerStatus};
use super::{EnergyModel, EnergyReport};
use crate::error::{DloError, Result};
use crate::geometry::{build_guide, Configuration, Point2, Trajectory};

/// Stiffnesses and shape weight for the baseline planner, as read from a
/// scene's `"energy"` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub k_s: f64,
    pub k_b: f64,
    pub lambda: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            k_s: 100.0,
            k_b: 1e-4,
            lambda: 10.0,
        }
    }
}

impl EnergyConfig {
    /// Model at rest in `rest`, with segment rest length `segment_length`.
    pub fn model(&self, rest: &Configuration, segment_length: f64) -> Result<EnergyModel> {
        EnergyModel::from_rest_shape(rest, self.k_s, self.k_b, segment_length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub configuration: Configuration,
    pub report: EnergyReport,
    pub stats: MinimizerStats,
}

/// Locally minimize `E_internal + lambda * E_shape` starting from `start`.
/// With `opts.pin_endpoints` the first and last nodes are held at the
/// target's endpoints throughout.
pub fn solve_equilibrium(
    start: &Configuration,
    target: &Configuration,
    model: &EnergyModel,
    lambda: f64,
    opts: &MinimizerOptions,
) -> Result<Equilibrium> {
    let n = model.n_nodes();
    start.check_nodes(n)?;
    target.check_nodes(n)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DloError::InvalidInput(format!(
            "lambda must be non-negative and finite, got {lambda}"
        )));
    }
    let grad_tol = opts
        .grad_tol
        .unwrap_or(1e-8 * (model.k_s() + model.k_b()));

    let mut nodes = start.nodes().to_vec();
    let free = if opts.pin_endpoints {
        nodes[0] = target.node(0);
        nodes[n - 1] = target.node(n - 1);
        1..n - 1
    } else {
        0..n
    };
    let goal = target.nodes();

    let mut x: Vec<f64> = nodes[free.clone()]
        .iter()
        .flat_map(|p| [p.x, p.y])
        .collect();
    let mut work = nodes.clone();
    let mut grad = vec![Point2::ZERO; n];
    let objective = |v: &[f64], g: &mut [f64]| -> Option<f64> {
        for (k, i) in free.clone().enumerate() {
            work[i] = Point2::new(v[2 * k], v[2 * k + 1]);
        }
        grad.iter_mut().for_each(|p| *p = Point2::ZERO);
        let mut value = model.accumulate(&work, &mut grad).ok()?;
        for i in free.clone() {
            let d = work[i] - goal[i];
            value += lambda * d.norm_squared();
            grad[i] = grad[i] + d * (2.0 * lambda);
        }
        for (k, i) in free.clone().enumerate() {
            g[2 * k] = grad[i].x;
            g[2 * k + 1] = grad[i].y;
        }
        Some(value)
    };
    let stats = minimize(objective, &mut x, grad_tol, opts);

    for (k, i) in free.enumerate() {
        nodes[i] = Point2::new(x[2 * k], x[2 * k + 1]);
    }
    let configuration = Configuration::new(nodes)?;
    let report = model.report(&configuration, target, lambda)?;
    Ok(Equilibrium {
        configuration,
        report,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrajectory {
    pub trajectory: Trajectory,
    /// Minimizer statistics for steps 2..T.
    pub steps: Vec<MinimizerStats>,
    pub final_report: EnergyReport,
    /// Wall-clock seconds for the whole sequence of equilibrium solves.
    pub total_time: f64,
}

impl EnergyTrajectory {
    /// Worst status over all steps.
    pub fn status(&self) -> MinimizerStatus {
        let rank = |s: MinimizerStatus| match s {
            MinimizerStatus::Converged => 0,
            MinimizerStatus::MaxIterations => 1,
            MinimizerStatus::LineSearchFailed => 2,
        };
        self.steps
            .iter()
            .map(|s| s.status)
            .max_by_key(|s| rank(*s))
            .unwrap_or(MinimizerStatus::Converged)
    }

    pub fn iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }
}

/// Quasi-static stepping: step `t` is the equilibrium for the straight-line
/// guide shape at `t`, warm-started from step `t - 1`.
pub fn solve_trajectory(
    start: &Configuration,
    target: &Configuration,
    model: &EnergyModel,
    lambda: f64,
    n_steps: usize,
    opts: &MinimizerOptions,
) -> Result<EnergyTrajectory> {
    let clock = Instant::now();
    let guide = build_guide(start, target, n_steps)?;
    let mut configs = Vec::with_capacity(n_steps);
    let mut stats = Vec::with_capacity(n_steps - 1);
    configs.push(start.clone());
    let mut report = model.report(start, start, lambda)?;
    for t in 1..n_steps {
        let eq = solve_equilibrium(&configs[t - 1], guide.step(t), model, lambda, opts)?;
        configs.push(eq.configuration);
        stats.push(eq.stats);
        report = eq.report;
    }
    Ok(EnergyTrajectory {
        trajectory: Trajectory::new(configs)?,
        steps: stats,
        final_report: report,
        total_time: clock.elapsed().as_secs_f64(),
    })
}
