//! Limited-memory quasi-Newton descent with Armijo backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerOptions {
    /// Stop when the gradient's Euclidean norm falls below this. `None`
    /// means `1e-8 * (k_s + k_b)` for the energy baseline.
    pub grad_tol: Option<f64>,
    pub max_iterations: usize,
    /// Curvature pairs kept; zero gives plain gradient descent.
    pub memory: usize,
    /// Hold the first and last node at the target's endpoints.
    pub pin_endpoints: bool,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_c1: f64,
    /// Step shrink factor per backtrack.
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            grad_tol: None,
            max_iterations: 10_000,
            memory: 8,
            pin_endpoints: true,
            armijo_c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimizerStatus {
    Converged,
    MaxIterations,
    /// No step along the search direction decreased the objective.
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerStats {
    pub status: MinimizerStatus,
    pub iterations: usize,
    pub evaluations: usize,
    pub grad_norm: f64,
    /// Objective at the start point and after every accepted step.
    pub objective_trace: Vec<f64>,
    pub solve_time: f64,
}

/// Minimize `f` from `x`, in place.
///
/// `f(x, grad)` writes the gradient into `grad` and returns the objective,
/// or `None` where the objective is undefined (the line search then treats
/// the trial point as infinitely bad).
pub fn minimize<F>(mut f: F, x: &mut [f64], grad_tol: f64, opts: &MinimizerOptions) -> MinimizerStats
where
    F: FnMut(&[f64], &mut [f64]) -> Option<f64>,
{
    let clock = std::time::Instant::now();
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut evaluations = 1;
    let mut fx = f(x, &mut g).unwrap_or(f64::INFINITY);
    let mut trace = vec![fx];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut alpha_buf = vec![0.0; opts.memory];
    let mut status = MinimizerStatus::MaxIterations;
    let mut iterations = 0;

    if !fx.is_finite() {
        return MinimizerStats {
            status: MinimizerStatus::LineSearchFailed,
            iterations,
            evaluations,
            grad_norm: f64::INFINITY,
            objective_trace: trace,
            solve_time: clock.elapsed().as_secs_f64(),
        };
    }

    loop {
        let gnorm = norm(&g);
        if gnorm <= grad_tol {
            status = MinimizerStatus::Converged;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        two_loop(&g, &pairs, &mut alpha_buf, &mut dir);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            pairs.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = -gnorm * gnorm;
        }
        // Without curvature information, cap the first trial step length.
        let mut step = if pairs.is_empty() {
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            for k in 0..n {
                trial[k] = x[k] + step * dir[k];
            }
            evaluations += 1;
            if let Some(ft) = f(&trial, &mut g_trial) {
                if ft.is_finite() && ft <= fx + opts.armijo_c1 * step * slope {
                    accepted = Some(ft);
                    break;
                }
            }
            step *= opts.backtrack;
        }
        let Some(f_new) = accepted else {
            status = MinimizerStatus::LineSearchFailed;
            break;
        };

        let s: Vec<f64> = (0..n).map(|k| trial[k] - x[k]).collect();
        let y: Vec<f64> = (0..n).map(|k| g_trial[k] - g[k]).collect();
        let sy = dot(&s, &y);
        if opts.memory > 0 && sy > 1e-12 * norm(&s) * norm(&y) {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_trial);
        fx = f_new;
        trace.push(fx);
    }

    MinimizerStats {
        status,
        iterations,
        evaluations,
        grad_norm: norm(&g),
        objective_trace: trace,
        solve_time: clock.elapsed().as_secs_f64(),
    }
}

/// `dir = -H g` for the limited-memory inverse Hessian estimate.
fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, alpha: &mut [f64], dir: &mut [f64]) {
    dir.iter_mut().zip(g).for_each(|(d, gi)| *d = -gi);
    for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
        let a = rho * dot(s, dir);
        alpha[k] = a;
        dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        dir.iter_mut().for_each(|d| *d *= gamma);
    }
    for (k, (s, y, rho)) in pairs.iter().enumerate() {
        let b = rho * dot(y, dir);
        dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alpha[k] - b) * si);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> Option<f64> {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        Some((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let mut x = [-1.2, 1.0];
        let stats = minimize(rosenbrock, &mut x, 1e-10, &MinimizerOptions::default());
        assert_eq!(stats.status, MinimizerStatus::Converged);
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] - 1.0).abs() < 1e-8);
        assert!(stats.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn gradient_descent_on_quadratic() {
        let opts = MinimizerOptions { memory: 0, ..Default::default() };
        let mut x = [3.0, -2.0];
        let stats = minimize(
            |x, g| {
                g[0] = 2.0 * x[0];
                g[1] = 8.0 * x[1];
                Some(x[0] * x[0] + 4.0 * x[1] * x[1])
            },
            &mut x,
            1e-9,
            &opts,
        );
        assert_eq!(stats.status, MinimizerStatus::Converged);
        assert!(x[0].abs() < 1e-9 && x[1].abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_reported() {
        let opts = MinimizerOptions { max_iterations: 3, ..Default::default() };
        let mut x = [-1.2, 1.0];
        let stats = minimize(rosenbrock, &mut x, 1e-12, &opts);
        assert_eq!(stats.status, MinimizerStatus::MaxIterations);
        assert_eq!(stats.iterations, 3);
    }

    #[test]
    fn undefined_start() {
        let mut x = [0.0];
        let stats = minimize(|_, _| None, &mut x, 1e-6, &MinimizerOptions::default());
        assert_eq!(stats.status, MinimizerStatus::LineSearchFailed);
    }
}
