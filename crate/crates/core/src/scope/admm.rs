//! ADMM for the segment-ball program.
//!
//! With `x` the free node coordinates and `A x + c` the stacked segment
//! vectors, the splitting is
//!
//! ```text
//! minimize  1/2 x'Px + q'x   subject to  A x + c = z,  z in B(l0)^m
//! ```
//!
//! The x-update solves `(P + sigma I + rho A'A) x = sigma x_k - q + A'(rho (z - c) - y)`
//! with a band Cholesky factor computed once; the z-update projects each
//! segment onto its ball. x and y coordinates share the same matrix.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::banded::SymmetricBand;
use super::{ScopeProblem, ScopeSolution, SolveStatus, SolverSettings, WarmStart};
use crate::error::{DloError, Result};
use crate::geometry::{Configuration, Point2, Trajectory};

/// Proximal weight keeping the x-update well posed when `w1 = 0`.
const SIGMA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub primal: f64,
    pub dual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub residuals: Vec<ResidualSample>,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Free(usize),
    Fixed(Point2),
}

/// A segment row of `A x + c`: the segment runs from `tail` to `head`.
struct SegmentRow {
    tail: Option<usize>,
    head: Option<usize>,
    offset: Point2,
}

struct Program {
    n_nodes: usize,
    slots: Vec<Slot>,
    n_free: usize,
    hessian: SymmetricBand,
    linear: Vec<Point2>,
    rows: Vec<SegmentRow>,
    radius: f64,
}

impl Program {
    fn build(problem: &ScopeProblem) -> Self {
        let n = problem.n_nodes();
        let steps = problem.n_steps();
        let (w1, w2) = problem.weights();
        let pins = problem.gripper_waypoints();

        let mut slots = Vec::with_capacity(n * steps);
        let mut n_free = 0;
        for t in 0..steps {
            for i in 0..n {
                let slot = if t == 0 {
                    Slot::Fixed(problem.start().node(i))
                } else if t == steps - 1 {
                    Slot::Fixed(problem.target().node(i))
                } else if let (Some(p), true) = (pins, i == 0 || i == n - 1) {
                    let (first, last) = p[t - 1];
                    Slot::Fixed(if i == 0 { first } else { last })
                } else {
                    n_free += 1;
                    Slot::Free(n_free - 1)
                };
                slots.push(slot);
            }
        }

        let mut edges = Vec::new();
        let mut rows = Vec::new();
        for t in 1..steps.saturating_sub(1) {
            for i in 0..n - 1 {
                let (a, b) = (slots[t * n + i], slots[t * n + i + 1]);
                let mut row = SegmentRow {
                    tail: None,
                    head: None,
                    offset: Point2::ZERO,
                };
                match a {
                    Slot::Free(k) => row.tail = Some(k),
                    Slot::Fixed(p) => row.offset = row.offset - p,
                }
                match b {
                    Slot::Free(k) => row.head = Some(k),
                    Slot::Fixed(p) => row.offset = row.offset + p,
                }
                if let (Some(u), Some(v)) = (row.tail, row.head) {
                    edges.push((u, v));
                }
                if row.tail.is_some() || row.head.is_some() {
                    rows.push(row);
                }
            }
        }
        for t in 0..steps - 1 {
            for i in 0..n {
                if let (Slot::Free(u), Slot::Free(v)) = (slots[t * n + i], slots[(t + 1) * n + i]) {
                    edges.push((u, v));
                }
            }
        }
        let bandwidth = edges.iter().map(|(u, v)| u.abs_diff(*v)).max().unwrap_or(0);

        let mut hessian = SymmetricBand::zeros(n_free, bandwidth);
        let mut linear = vec![Point2::ZERO; n_free];
        // Smoothness: w1 |p(i,t+1) - p(i,t)|^2.
        for t in 0..steps - 1 {
            for i in 0..n {
                match (slots[t * n + i], slots[(t + 1) * n + i]) {
                    (Slot::Free(u), Slot::Free(v)) => {
                        hessian.add(u, u, 2.0 * w1);
                        hessian.add(v, v, 2.0 * w1);
                        hessian.add(u, v, -2.0 * w1);
                    }
                    (Slot::Free(u), Slot::Fixed(p)) | (Slot::Fixed(p), Slot::Free(u)) => {
                        hessian.add(u, u, 2.0 * w1);
                        linear[u] = linear[u] - p * (2.0 * w1);
                    }
                    (Slot::Fixed(_), Slot::Fixed(_)) => {}
                }
            }
        }
        // Guidance: w2 |p(i,t) - g(i,t)|^2 on interior nodes and steps.
        for t in 1..steps.saturating_sub(1) {
            for i in 1..n - 1 {
                if let Slot::Free(u) = slots[t * n + i] {
                    hessian.add(u, u, 2.0 * w2);
                    linear[u] = linear[u] - problem.guide().step(t).node(i) * (2.0 * w2);
                }
            }
        }

        Program {
            n_nodes: n,
            slots,
            n_free,
            hessian,
            linear,
            rows,
            radius: problem.params().segment_rest_length(),
        }
    }

    fn apply_a(&self, x: &[Point2], out: &mut [Point2]) {
        for (row, o) in self.rows.iter().zip(out.iter_mut()) {
            let mut d = row.offset;
            if let Some(h) = row.head {
                d = d + x[h];
            }
            if let Some(t) = row.tail {
                d = d - x[t];
            }
            *o = d;
        }
    }

    /// `out += A' v`
    fn add_at(&self, v: &[Point2], out: &mut [Point2]) {
        for (row, val) in self.rows.iter().zip(v) {
            if let Some(h) = row.head {
                out[h] = out[h] + *val;
            }
            if let Some(t) = row.tail {
                out[t] = out[t] - *val;
            }
        }
    }

    fn hessian_mul(&self, x: &[Point2], xs: &mut [f64], ys: &mut [f64], out: &mut [Point2]) {
        let (mut ox, mut oy) = (vec![0.0; self.n_free], vec![0.0; self.n_free]);
        for (k, p) in x.iter().enumerate() {
            xs[k] = p.x;
            ys[k] = p.y;
        }
        self.hessian.mul_vec(xs, &mut ox);
        self.hessian.mul_vec(ys, &mut oy);
        for (k, o) in out.iter_mut().enumerate() {
            *o = Point2::new(ox[k], oy[k]);
        }
    }

    fn trajectory(&self, x: &[Point2]) -> Result<Trajectory> {
        let steps = self
            .slots
            .chunks(self.n_nodes)
            .map(|chunk| {
                Configuration::new(
                    chunk
                        .iter()
                        .map(|s| match *s {
                            Slot::Free(k) => x[k],
                            Slot::Fixed(p) => p,
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(steps)
    }
}

fn project_ball(v: Point2, radius: f64) -> Point2 {
    let norm = v.norm();
    if norm > radius {
        v * (radius / norm)
    } else {
        v
    }
}

pub(super) fn solve(
    problem: &ScopeProblem,
    settings: &SolverSettings,
    record: bool,
) -> Result<(ScopeSolution, SolveTrace)> {
    settings.validate()?;
    let clock = Instant::now();
    let prog = Program::build(problem);
    let rho = settings.penalty_rho;
    let alpha = settings.over_relaxation;
    let n = prog.n_free;
    let m = prog.rows.len();

    let mut kkt = prog.hessian.clone();
    for k in 0..n {
        kkt.add(k, k, SIGMA);
    }
    for row in &prog.rows {
        if let Some(h) = row.head {
            kkt.add(h, h, rho);
        }
        if let Some(t) = row.tail {
            kkt.add(t, t, rho);
        }
        if let (Some(h), Some(t)) = (row.head, row.tail) {
            kkt.add(h, t, -rho);
        }
    }
    let factor = kkt.cholesky().ok_or_else(|| {
        DloError::InvalidInput("ADMM system matrix is not positive definite".into())
    })?;

    let mut x = vec![Point2::ZERO; n];
    let mut z = vec![Point2::ZERO; m];
    let mut y = vec![Point2::ZERO; m];
    if settings.warm_start == WarmStart::Guide {
        let guide = problem.guide();
        for (idx, slot) in prog.slots.iter().enumerate() {
            if let Slot::Free(k) = slot {
                x[*k] = guide.step(idx / prog.n_nodes).node(idx % prog.n_nodes);
            }
        }
        prog.apply_a(&x, &mut z);
        for v in z.iter_mut() {
            *v = project_ball(*v, prog.radius);
        }
    }

    let mut trace = SolveTrace::default();
    let mut ax = vec![Point2::ZERO; m];
    let mut rhs = vec![Point2::ZERO; n];
    let mut grad = vec![Point2::ZERO; n];
    let mut scratch = vec![Point2::ZERO; m];
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    for iter in 1..=settings.max_iterations {
        iterations = iter;
        // x-update
        for k in 0..n {
            rhs[k] = x[k] * SIGMA - prog.linear[k];
        }
        for (s, row) in prog.rows.iter().enumerate() {
            scratch[s] = (z[s] - row.offset) * rho - y[s];
        }
        prog.add_at(&scratch, &mut rhs);
        for k in 0..n {
            bx[k] = rhs[k].x;
            by[k] = rhs[k].y;
        }
        factor.solve_in_place(&mut bx);
        factor.solve_in_place(&mut by);
        for k in 0..n {
            x[k] = Point2::new(bx[k], by[k]);
        }

        // z- and y-updates with over-relaxation.
        prog.apply_a(&x, &mut ax);
        let mut primal: f64 = 0.0;
        for s in 0..m {
            let relaxed = ax[s] * alpha + z[s] * (1.0 - alpha);
            let z_new = project_ball(relaxed + y[s] * (1.0 / rho), prog.radius);
            y[s] = y[s] + (relaxed - z_new) * rho;
            z[s] = z_new;
            primal = primal.max((ax[s] - z_new).norm());
        }

        // Stationarity: P x + q + A'y.
        prog.hessian_mul(&x, &mut bx, &mut by, &mut grad);
        for k in 0..n {
            grad[k] = grad[k] + prog.linear[k];
        }
        prog.add_at(&y, &mut grad);
        let dual = grad
            .iter()
            .map(|g| g.x.abs().max(g.y.abs()))
            .fold(0.0, f64::max);

        if record {
            trace.residuals.push(ResidualSample { primal, dual });
        }
        if !(primal.is_finite() && dual.is_finite()) {
            status = SolveStatus::Infeasible;
            break;
        }
        if primal <= settings.primal_tolerance && dual <= settings.dual_tolerance {
            status = SolveStatus::Converged;
            break;
        }
    }
    let solve_time = clock.elapsed().as_secs_f64();

    if status == SolveStatus::Infeasible {
        // Fall back to the guide so callers still get a well-formed trajectory.
        x.iter_mut().for_each(|p| *p = Point2::ZERO);
        for (idx, slot) in prog.slots.iter().enumerate() {
            if let Slot::Free(k) = slot {
                x[*k] = problem.guide().step(idx / prog.n_nodes).node(idx % prog.n_nodes);
            }
        }
    }
    let trajectory = prog.trajectory(&x)?;
    let objective_value = problem.objective_value(&trajectory)?;
    let max_constraint_violation = trajectory.max_segment_excess(prog.radius);
    Ok((
        ScopeSolution {
            trajectory,
            objective_value,
            iterations,
            max_constraint_violation,
            status,
            solve_time,
        },
        trace,
    ))
}
