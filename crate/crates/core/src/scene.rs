//! JSON scene files.
//!
//! ```json
//! {
//!   "n_nodes": 15, "segment_length": 0.05, "T": 10, "w1": 1.0, "w2": 0.1,
//!   "start":  {"kind": "QSW", "origin": [0, 0], "rotation": 0.0},
//!   "target": {"kind": "HSW", "origin": [0, 0], "rotation": 0.436, "mirror": false},
//!   "energy": {"k_s": 100.0, "k_b": 0.0001, "lambda": 10.0}
//! }
//! ```
//!
//! `w1`, `w2`, `energy`, `rotation` and `mirror` are optional.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyConfig;
use crate::error::{DloError, Result};
use crate::geometry::{generate_shape, Configuration, DloParams, Point2, ShapeKind, ShapeSpec};
use crate::scope::{DEFAULT_W1, DEFAULT_W2};

pub const DEFAULT_STEPS: usize = 10;

/// Shape placement as written in a scene file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub kind: ShapeKind,
    #[serde(default)]
    pub origin: Point2,
    #[serde(default)]
    pub rotation: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mirror: bool,
}

impl Placement {
    pub fn spec(&self, n_nodes: usize, segment_length: f64) -> ShapeSpec {
        ShapeSpec {
            kind: self.kind,
            n_nodes,
            segment_length,
            origin: self.origin,
            rotation: self.rotation,
            mirror: self.mirror,
        }
    }
}

impl From<&ShapeSpec> for Placement {
    fn from(s: &ShapeSpec) -> Self {
        Placement {
            kind: s.kind,
            origin: s.origin,
            rotation: s.rotation,
            mirror: s.mirror,
        }
    }
}

fn default_w1() -> f64 {
    DEFAULT_W1
}

fn default_w2() -> f64 {
    DEFAULT_W2
}

/// On-disk scene layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub n_nodes: usize,
    pub segment_length: f64,
    pub start: Placement,
    pub target: Placement,
    #[serde(rename = "T")]
    pub n_steps: usize,
    #[serde(default = "default_w1")]
    pub w1: f64,
    #[serde(default = "default_w2")]
    pub w2: f64,
    #[serde(default)]
    pub energy: EnergyConfig,
}

/// A validated scene with its boundary shapes generated.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub params: DloParams,
    pub start_spec: ShapeSpec,
    pub target_spec: ShapeSpec,
    pub start: Configuration,
    pub target: Configuration,
    pub n_steps: usize,
    pub w1: f64,
    pub w2: f64,
    pub energy: EnergyConfig,
}

impl Scene {
    pub fn new(
        start_spec: ShapeSpec,
        target_spec: ShapeSpec,
        n_steps: usize,
        w1: f64,
        w2: f64,
        energy: EnergyConfig,
    ) -> Result<Self> {
        if start_spec.n_nodes != target_spec.n_nodes
            || start_spec.segment_length != target_spec.segment_length
        {
            return Err(DloError::InvalidInput(
                "start and target must share n_nodes and segment_length".into(),
            ));
        }
        if n_steps < 2 {
            return Err(DloError::InvalidInput(format!(
                "T must be at least 2, got {n_steps}"
            )));
        }
        let params = DloParams::new(start_spec.n_nodes, start_spec.segment_length)?;
        let start = generate_shape(&start_spec)?;
        let target = generate_shape(&target_spec)?;
        Ok(Self {
            params,
            start_spec,
            target_spec,
            start,
            target,
            n_steps,
            w1,
            w2,
            energy,
        })
    }

    pub fn from_file(file: &SceneFile) -> Result<Self> {
        Self::new(
            file.start.spec(file.n_nodes, file.segment_length),
            file.target.spec(file.n_nodes, file.segment_length),
            file.n_steps,
            file.w1,
            file.w2,
            file.energy,
        )
    }

    /// Parse and validate. Syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            n_nodes: self.params.n_nodes(),
            segment_length: self.params.segment_rest_length(),
            start: Placement::from(&self.start_spec),
            target: Placement::from(&self.target_spec),
            n_steps: self.n_steps,
            w1: self.w1,
            w2: self.w2,
            energy: self.energy,
        }
    }
}
