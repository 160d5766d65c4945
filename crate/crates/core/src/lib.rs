//! Smooth convex trajectory planning for planar deformable linear objects.
//!
//! The crate plans how a cable-like object should deform from a start shape
//! to a target shape over `T` time steps. Two planners are provided behind
//! the [`Planner`] trait:
//!
//! * `scope`: a convex program (quadratic smoothness and guide terms, one
//!   second-order cone per segment) solved by ADMM;
//! * `energy`: a mass-spring baseline that minimizes stretching and bending
//!   energy plus a shape-tracking term, one equilibrium per step.
//!
//! [`bench`] runs both on the standard transitions and [`render`] draws the
//! resulting trajectories as SVG.

pub mod bench;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod planner;
pub mod render;
pub mod scene;
pub mod scope;

pub use error::{DloError, Result};
pub use geometry::{Configuration, DloParams, Point2, ShapeKind, ShapeSpec, Trajectory};
pub use planner::{Method, PlanOutcome, PlanStatus, Planner, PlannerRegistry, PlannerSettings};
pub use render::{render_svg, RenderStyle};
pub use scene::Scene;
