//! Canonical test shapes.
//!
//! Curved families are defined on a unit-width parametric curve and then
//! walked with equal chords, so every segment of the result has exactly the
//! requested length and the last node lands on the curve's end point.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Configuration, Point2};
use crate::error::{DloError, Result};

/// Samples used to bracket each chord crossing before refining it.
const DENSE_SAMPLES: usize = 100_000;

/// Height-to-width ratio of the quarter-sine curve.
pub const QSW_ASPECT: f64 = 0.5;
/// Height-to-width ratio of the half-sine arch.
pub const HSW_ASPECT: f64 = 0.2;
/// Amplitude-to-width ratio of the full-period S curve.
pub const S_ASPECT: f64 = 0.22;
/// Angle swept by the U arc.
pub const U_SWEEP: f64 = 2.0 * PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeKind {
    /// Quarter sine wave: `y = A sin(pi x / 2W)`, rising from the origin.
    #[serde(rename = "QSW")]
    Qsw,
    /// Half sine wave: `y = A sin(pi x / W)`, a single arch.
    #[serde(rename = "HSW")]
    Hsw,
    /// Circular arc opening upward, bottom at mid-length.
    U,
    /// Full sine period: `y = A sin(2 pi x / W)`.
    S,
    /// Straight line along +x.
    I,
    /// Two perpendicular straight runs, turning left at a node.
    L,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Qsw,
        ShapeKind::Hsw,
        ShapeKind::U,
        ShapeKind::S,
        ShapeKind::I,
        ShapeKind::L,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Qsw => "QSW",
            ShapeKind::Hsw => "HSW",
            ShapeKind::U => "U",
            ShapeKind::S => "S",
            ShapeKind::I => "I",
            ShapeKind::L => "L",
        }
    }

    /// Point on the unit-width curve for `u` in `[0, 1]`, starting at the
    /// origin. `None` for the piecewise-straight kinds.
    fn curve(self, u: f64) -> Option<Point2> {
        match self {
            ShapeKind::Qsw => Some(Point2::new(u, QSW_ASPECT * (0.5 * PI * u).sin())),
            ShapeKind::Hsw => Some(Point2::new(u, HSW_ASPECT * (PI * u).sin())),
            ShapeKind::S => Some(Point2::new(u, S_ASPECT * (2.0 * PI * u).sin())),
            ShapeKind::U => {
                let half = 0.5 * U_SWEEP;
                let theta = -half + U_SWEEP * u;
                // Unit-radius arc, shifted so u = 0 sits at the origin.
                Some(Point2::new(
                    theta.sin() + half.sin(),
                    half.cos() - theta.cos(),
                ))
            }
            ShapeKind::I | ShapeKind::L => None,
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = DloError;
    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DloError::InvalidInput(format!("unknown shape kind {s:?}")))
    }
}

/// Recipe for one canonical shape: family, discretization, and placement.
///
/// Placement is applied as: optional reflection across the x-axis, then
/// counter-clockwise rotation about node 1, then translation of node 1 to
/// `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub n_nodes: usize,
    pub segment_length: f64,
    pub origin: Point2,
    pub rotation: f64,
    #[serde(default)]
    pub mirror: bool,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, n_nodes: usize, segment_length: f64) -> Self {
        Self {
            kind,
            n_nodes,
            segment_length,
            origin: Point2::ZERO,
            rotation: 0.0,
            mirror: false,
        }
    }

    pub fn at(mut self, origin: Point2) -> Self {
        self.origin = origin;
        self
    }

    pub fn rotated(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn mirrored(mut self, mirror: bool) -> Self {
        self.mirror = mirror;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 3 {
            return Err(DloError::InvalidInput(format!(
                "shape {} needs n_nodes >= 3, got {}",
                self.kind, self.n_nodes
            )));
        }
        if !self.segment_length.is_finite()
            || !self.rotation.is_finite()
            || !self.origin.is_finite()
        {
            return Err(DloError::NonFinite("shape spec"));
        }
        if self.segment_length <= 0.0 {
            return Err(DloError::InvalidInput(format!(
                "segment_length must be positive, got {}",
                self.segment_length
            )));
        }
        Ok(())
    }
}

/// Build the configuration described by `spec`. Every segment has length
/// `spec.segment_length` to within about 1e-12 relative.
pub fn generate_shape(spec: &ShapeSpec) -> Result<Configuration> {
    spec.validate()?;
    let n = spec.n_nodes;
    let ls = spec.segment_length;
    let local: Vec<Point2> = match spec.kind {
        ShapeKind::I => (0..n).map(|i| Point2::new(i as f64 * ls, 0.0)).collect(),
        ShapeKind::L => {
            let corner = (n - 1) / 2;
            (0..n)
                .map(|i| {
                    if i <= corner {
                        Point2::new(i as f64 * ls, 0.0)
                    } else {
                        Point2::new(corner as f64 * ls, (i - corner) as f64 * ls)
                    }
                })
                .collect()
        }
        kind => {
            let unit = equal_chord_walk(|u| kind.curve(u).unwrap(), n);
            unit.nodes.iter().map(|p| *p * (ls / unit.chord)).collect()
        }
    };
    let mut c = Configuration::new(local)?;
    if spec.mirror {
        c = c.mirrored();
    }
    Ok(c.transformed(spec.rotation, spec.origin))
}

struct ChordWalk {
    nodes: Vec<Point2>,
    chord: f64,
}

/// Place `n` points on `curve` (parameter in `[0, 1]`) so that consecutive
/// points are one common chord apart and the last point is `curve(1)`.
fn equal_chord_walk(curve: impl Fn(f64) -> Point2, n: usize) -> ChordWalk {
    let dense: Vec<Point2> = (0..=DENSE_SAMPLES)
        .map(|k| curve(k as f64 / DENSE_SAMPLES as f64))
        .collect();
    let polyline_len: f64 = dense.windows(2).map(|w| w[0].distance(w[1])).sum();
    let end = dense[DENSE_SAMPLES];

    // Walk n - 2 chords of length h; report how far the final chord must
    // reach minus h, or None if the walk ran off the end of the curve.
    let walk = |h: f64, out: &mut Vec<Point2>| -> Option<f64> {
        out.clear();
        out.push(dense[0]);
        let mut u = 0.0;
        let mut p = dense[0];
        for _ in 0..n - 2 {
            let first = (u * DENSE_SAMPLES as f64).floor() as usize + 1;
            let next = (first..=DENSE_SAMPLES).find(|&j| p.distance(dense[j]) >= h)?;
            let mut lo = ((next - 1) as f64 / DENSE_SAMPLES as f64).max(u);
            let mut hi = next as f64 / DENSE_SAMPLES as f64;
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if p.distance(curve(mid)) < h {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            u = hi;
            p = curve(u);
            out.push(p);
        }
        Some(p.distance(end) - h)
    };

    let mut nodes = Vec::with_capacity(n);
    let segments = (n - 1) as f64;
    let mut lo = 0.25 * polyline_len / segments;
    let mut hi = polyline_len / segments * (1.0 + 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match walk(mid, &mut nodes) {
            Some(r) if r > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    walk(lo, &mut nodes).expect("lower chord bracket always fits");
    nodes.push(end);
    ChordWalk { nodes, chord: lo }
}
