//! Planar polyline geometry: node positions, configurations, trajectories and
//! the metrics used to score them.
//!
//! Indices in error messages are 1-based (node 1 is the first node, step 1
//! the first time step); the Rust API itself is 0-based.

mod metrics;
mod shapes;

pub use metrics::{build_guide, max_length_error, shape_error};
pub use shapes::{generate_shape, ShapeKind, ShapeSpec};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{DloError, Result};

/// A point (or displacement) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (other - self).norm()
    }

    /// Counter-clockwise rotation about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotate by 90 degrees counter-clockwise.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        Point2::new(
            self.x + s * (other.x - self.x),
            self.y + s * (other.y - self.y),
        )
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// One shape of the object: an ordered polyline of at least two finite nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Configuration {
    nodes: Vec<Point2>,
}

impl Configuration {
    pub fn new(nodes: Vec<Point2>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(DloError::InvalidInput(format!(
                "a configuration needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if !nodes.iter().all(|p| p.is_finite()) {
            return Err(DloError::NonFinite("configuration nodes"));
        }
        Ok(Self { nodes })
    }

    pub fn from_xy(coords: &[[f64; 2]]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Point2::from).collect())
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> Point2 {
        self.nodes[i]
    }

    /// Segment vectors `p[i+1] - p[i]`, `N - 1` of them.
    pub fn segments(&self) -> impl Iterator<Item = Point2> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.segments().map(Point2::norm).collect()
    }

    /// Polyline length: sum of segment lengths.
    pub fn arc_length(&self) -> f64 {
        self.segments().map(Point2::norm).sum()
    }

    /// Signed counter-clockwise turning angle at each interior node, in
    /// `(-pi, pi]`. Needs at least three nodes and no zero-length segment.
    pub fn turning_angles(&self) -> Result<Vec<f64>> {
        if self.nodes.len() < 3 {
            return Err(DloError::InvalidInput(
                "turning angles need at least 3 nodes".into(),
            ));
        }
        let segs: Vec<Point2> = self.segments().collect();
        if let Some(k) = segs.iter().position(|s| s.norm_squared() == 0.0) {
            return Err(DloError::DegenerateSegment { segment: k + 1 });
        }
        Ok(segs.windows(2).map(|w| turning_angle(w[0], w[1])).collect())
    }

    /// Apply `p -> R(angle) p + offset` to every node.
    pub fn transformed(&self, angle: f64, offset: Point2) -> Configuration {
        Configuration {
            nodes: self.nodes.iter().map(|p| p.rotated(angle) + offset).collect(),
        }
    }

    /// Reflect across the x-axis.
    pub fn mirrored(&self) -> Configuration {
        Configuration {
            nodes: self.nodes.iter().map(|p| Point2::new(p.x, -p.y)).collect(),
        }
    }

    pub(crate) fn check_nodes(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(DloError::NodeCountMismatch {
                expected,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Point2>> for Configuration {
    type Error = DloError;
    fn try_from(nodes: Vec<Point2>) -> Result<Self> {
        Configuration::new(nodes)
    }
}

impl From<Configuration> for Vec<Point2> {
    fn from(c: Configuration) -> Self {
        c.nodes
    }
}

/// Signed angle from segment `a` to segment `b`, in `(-pi, pi]`.
pub(crate) fn turning_angle(a: Point2, b: Point2) -> f64 {
    let angle = a.cross(b).atan2(a.dot(b));
    // atan2 returns -pi for (-0, negative); fold onto the closed end.
    if angle == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        angle
    }
}

/// A sequence of `T >= 2` configurations sharing one node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Configuration>", into = "Vec<Configuration>")]
pub struct Trajectory {
    steps: Vec<Configuration>,
}

impl Trajectory {
    pub fn new(steps: Vec<Configuration>) -> Result<Self> {
        if steps.len() < 2 {
            return Err(DloError::InvalidInput(format!(
                "a trajectory needs at least 2 steps, got {}",
                steps.len()
            )));
        }
        let n = steps[0].len();
        for s in &steps[1..] {
            s.check_nodes(n)?;
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Configuration] {
        &self.steps
    }

    pub fn step(&self, t: usize) -> &Configuration {
        &self.steps[t]
    }

    pub fn first(&self) -> &Configuration {
        &self.steps[0]
    }

    pub fn last(&self) -> &Configuration {
        &self.steps[self.steps.len() - 1]
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Node count `N` shared by every step.
    pub fn n_nodes(&self) -> usize {
        self.steps[0].len()
    }

    pub fn transformed(&self, angle: f64, offset: Point2) -> Trajectory {
        Trajectory {
            steps: self
                .steps
                .iter()
                .map(|c| c.transformed(angle, offset))
                .collect(),
        }
    }

    /// Largest distance any single node travels between consecutive steps.
    pub fn max_step_displacement(&self) -> f64 {
        self.steps
            .windows(2)
            .flat_map(|w| {
                w[0].nodes()
                    .iter()
                    .zip(w[1].nodes())
                    .map(|(a, b)| a.distance(*b))
            })
            .fold(0.0, f64::max)
    }

    /// Largest amount by which any segment at any step exceeds `limit`
    /// (zero when every segment is within the limit).
    pub fn max_segment_excess(&self, limit: f64) -> f64 {
        self.steps
            .iter()
            .flat_map(|c| c.segments().map(|s| s.norm() - limit).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_shape(&self, n_nodes: usize, n_steps: usize) -> Result<()> {
        if self.len() != n_steps {
            return Err(DloError::StepCountMismatch {
                expected: n_steps,
                found: self.len(),
            });
        }
        self.first().check_nodes(n_nodes)
    }
}

impl TryFrom<Vec<Configuration>> for Trajectory {
    type Error = DloError;
    fn try_from(steps: Vec<Configuration>) -> Result<Self> {
        Trajectory::new(steps)
    }
}

impl From<Trajectory> for Vec<Configuration> {
    fn from(t: Trajectory) -> Self {
        t.steps
    }
}

/// Discretization of the object: node count and rest length per segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DloParamsRepr", into = "DloParamsRepr")]
pub struct DloParams {
    n_nodes: usize,
    segment_rest_length: f64,
    total_rest_length: f64,
}

#[derive(Serialize, Deserialize)]
struct DloParamsRepr {
    n_nodes: usize,
    segment_rest_length: f64,
}

impl DloParams {
    /// Desk-scale default: 15 nodes, 5 cm segments, 70 cm total.
    pub const DEFAULT_N_NODES: usize = 15;
    pub const DEFAULT_SEGMENT_LENGTH: f64 = 0.05;

    pub fn new(n_nodes: usize, segment_rest_length: f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(DloError::InvalidInput(format!(
                "n_nodes must be at least 2, got {n_nodes}"
            )));
        }
        if !(segment_rest_length.is_finite() && segment_rest_length > 0.0) {
            return Err(DloError::InvalidInput(format!(
                "segment length must be positive and finite, got {segment_rest_length}"
            )));
        }
        Ok(Self {
            n_nodes,
            segment_rest_length,
            total_rest_length: (n_nodes - 1) as f64 * segment_rest_length,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn segment_rest_length(&self) -> f64 {
        self.segment_rest_length
    }

    pub fn total_rest_length(&self) -> f64 {
        self.total_rest_length
    }
}

impl Default for DloParams {
    fn default() -> Self {
        Self::new(Self::DEFAULT_N_NODES, Self::DEFAULT_SEGMENT_LENGTH).unwrap()
    }
}

impl TryFrom<DloParamsRepr> for DloParams {
    type Error = DloError;
    fn try_from(r: DloParamsRepr) -> Result<Self> {
        DloParams::new(r.n_nodes, r.segment_rest_length)
    }
}

impl From<DloParams> for DloParamsRepr {
    fn from(p: DloParams) -> Self {
        DloParamsRepr {
            n_nodes: p.n_nodes,
            segment_rest_length: p.segment_rest_length,
        }
    }
}
