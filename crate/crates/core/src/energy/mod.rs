//! Mass-spring energy baseline.
//!
//! Each segment stores stretching energy `1/2 k_s (|p_{i+1} - p_i| - l_s)^2`
//! and each interior node bending energy `1/2 k_b (theta_i - theta_i^rest)^2`,
//! where `theta_i` is the signed turning angle. The baseline planner drives
//! the object toward a target by minimizing `E_internal + lambda * E_shape`.

mod baseline;
mod minimize;

pub use baseline::{
    solve_equilibrium, solve_trajectory, EnergyConfig, EnergyTrajectory, Equilibrium,
};
pub use minimize::{minimize, MinimizerOptions, MinimizerStats, MinimizerStatus};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DloError, Result};
use crate::geometry::{turning_angle, Configuration, Point2};

/// Stiffnesses and rest state of the mass-spring model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    k_s: f64,
    k_b: f64,
    rest_segment_length: f64,
    rest_angles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub stretch_total: f64,
    pub bend_total: f64,
    pub shape_term: f64,
    /// `stretch_total + bend_total + lambda * shape_term`.
    pub objective: f64,
}

impl EnergyModel {
    pub fn new(k_s: f64, k_b: f64, rest_segment_length: f64, rest_angles: Vec<f64>) -> Result<Self> {
        for (name, v) in [("k_s", k_s), ("k_b", k_b), ("rest segment length", rest_segment_length)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DloError::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(a) = rest_angles
            .iter()
            .find(|a| !(a.is_finite() && **a > -PI && **a <= PI))
        {
            return Err(DloError::InvalidInput(format!(
                "rest angles must lie in (-pi, pi], got {a}"
            )));
        }
        Ok(Self {
            k_s,
            k_b,
            rest_segment_length,
            rest_angles,
        })
    }

    /// Model whose rest angles are the turning angles of `rest`.
    pub fn from_rest_shape(
        rest: &Configuration,
        k_s: f64,
        k_b: f64,
        rest_segment_length: f64,
    ) -> Result<Self> {
        Self::new(k_s, k_b, rest_segment_length, rest.turning_angles()?)
    }

    pub fn k_s(&self) -> f64 {
        self.k_s
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn rest_segment_length(&self) -> f64 {
        self.rest_segment_length
    }

    pub fn rest_angles(&self) -> &[f64] {
        &self.rest_angles
    }

    /// Number of nodes the model applies to.
    pub fn n_nodes(&self) -> usize {
        self.rest_angles.len() + 2
    }

    pub fn stretch_energy(&self, c: &Configuration) -> f64 {
        c.segments()
            .map(|s| {
                let e = s.norm() - self.rest_segment_length;
                0.5 * self.k_s * e * e
            })
            .sum()
    }

    /// Bending energy. The angle deviation is taken modulo a full turn, so a
    /// node whose turning angle crosses `pi` is penalized by the short way
    /// round.
    pub fn bend_energy(&self, c: &Configuration) -> Result<f64> {
        c.check_nodes(self.n_nodes())?;
        let angles = c.turning_angles()?;
        Ok(angles
            .iter()
            .zip(&self.rest_angles)
            .map(|(a, r)| {
                let d = wrap_angle(a - r);
                0.5 * self.k_b * d * d
            })
            .sum())
    }

    pub fn internal_energy(&self, c: &Configuration) -> Result<f64> {
        Ok(self.stretch_energy(c) + self.bend_energy(c)?)
    }

    /// Internal energy and its exact gradient with respect to each node.
    pub fn internal_energy_and_gradient(&self, c: &Configuration) -> Result<(f64, Vec<Point2>)> {
        let mut grad = vec![Point2::ZERO; c.len()];
        let energy = self.accumulate(c.nodes(), &mut grad)?;
        Ok((energy, grad))
    }

    pub fn report(&self, c: &Configuration, target: &Configuration, lambda: f64) -> Result<EnergyReport> {
        let stretch_total = self.stretch_energy(c);
        let bend_total = self.bend_energy(c)?;
        let shape_term = crate::geometry::shape_error(c, target)?;
        Ok(EnergyReport {
            stretch_total,
            bend_total,
            shape_term,
            objective: stretch_total + bend_total + lambda * shape_term,
        })
    }

    /// Add the internal-energy gradient at `nodes` into `grad`; return the energy.
    pub(crate) fn accumulate(&self, nodes: &[Point2], grad: &mut [Point2]) -> Result<f64> {
        let n = nodes.len();
        if n != self.n_nodes() {
            return Err(DloError::NodeCountMismatch {
                expected: self.n_nodes(),
                found: n,
            });
        }
        let mut energy = 0.0;
        let segs: Vec<Point2> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let mut lens = Vec::with_capacity(segs.len());
        for (i, s) in segs.iter().enumerate() {
            let len = s.norm();
            if len == 0.0 {
                return Err(DloError::DegenerateSegment { segment: i + 1 });
            }
            let ext = len - self.rest_segment_length;
            energy += 0.5 * self.k_s * ext * ext;
            let g = *s * (self.k_s * ext / len);
            grad[i + 1] = grad[i + 1] + g;
            grad[i] = grad[i] - g;
            lens.push(len);
        }
        for j in 1..n - 1 {
            let (a, b) = (segs[j - 1], segs[j]);
            let d = wrap_angle(turning_angle(a, b) - self.rest_angles[j - 1]);
            energy += 0.5 * self.k_b * d * d;
            let ga = a.perp() * (1.0 / (lens[j - 1] * lens[j - 1]));
            let gb = b.perp() * (1.0 / (lens[j] * lens[j]));
            let scale = self.k_b * d;
            grad[j - 1] = grad[j - 1] + ga * scale;
            grad[j] = grad[j] - (ga + gb) * scale;
            grad[j + 1] = grad[j + 1] + gb * scale;
        }
        Ok(energy)
    }
}

/// Map an angle to `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}
