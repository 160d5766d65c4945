//! SVG figures of one or two trajectories.
//!
//! The first trajectory is drawn solid, the second (usually the baseline)
//! dashed. Output depends only on the inputs and the style, so identical
//! inputs give identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{DloError, Result};
use crate::geometry::{Point2, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub start_color: String,
    pub target_color: String,
    pub intermediate_color: String,
    pub baseline_dash_pattern: String,
    /// Pixels along the longer side.
    pub canvas_size: f64,
    pub margin: f64,
    pub stroke_width: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            start_color: "#d62728".into(),
            target_color: "#1f77b4".into(),
            intermediate_color: "#2ca02c".into(),
            baseline_dash_pattern: "6,4".into(),
            canvas_size: 800.0,
            margin: 40.0,
            stroke_width: 2.0,
        }
    }
}

fn is_hex_color(s: &str) -> bool {
    let Some(digits) = s.strip_prefix('#') else {
        return false;
    };
    matches!(digits.len(), 3 | 6 | 8) && digits.bytes().all(|b| b.is_ascii_hexdigit())
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("start_color", &self.start_color),
            ("target_color", &self.target_color),
            ("intermediate_color", &self.intermediate_color),
        ] {
            if !is_hex_color(c) {
                return Err(DloError::InvalidInput(format!(
                    "{name} must be a hex colour like #a1b2c3, got {c:?}"
                )));
            }
        }
        let dash_ok = self
            .baseline_dash_pattern
            .split(',')
            .all(|p| p.trim().parse::<f64>().is_ok_and(|v| v >= 0.0 && v.is_finite()));
        if !dash_ok {
            return Err(DloError::InvalidInput(format!(
                "baseline_dash_pattern must be comma-separated lengths, got {:?}",
                self.baseline_dash_pattern
            )));
        }
        if !(self.canvas_size > 0.0 && self.canvas_size.is_finite()) {
            return Err(DloError::InvalidInput("canvas_size must be positive".into()));
        }
        if !(self.margin >= 0.0 && 2.0 * self.margin < self.canvas_size) {
            return Err(DloError::InvalidInput(
                "margin must be non-negative and less than half the canvas".into(),
            ));
        }
        if !(self.stroke_width > 0.0 && self.stroke_width.is_finite()) {
            return Err(DloError::InvalidInput("stroke_width must be positive".into()));
        }
        Ok(())
    }
}

struct Frame {
    min: Point2,
    scale: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn fit(trajs: &[Trajectory], style: &RenderStyle) -> (Self, f64, f64) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in trajs.iter().flat_map(|t| t.steps()).flat_map(|c| c.nodes()) {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        let span = (max.x - min.x).max(max.y - min.y);
        let inner = style.canvas_size - 2.0 * style.margin;
        let scale = if span > 0.0 { inner / span } else { 1.0 };
        let width = (max.x - min.x) * scale + 2.0 * style.margin;
        let height = (max.y - min.y) * scale + 2.0 * style.margin;
        (
            Frame {
                min,
                scale,
                height,
                margin: style.margin,
            },
            width,
            height,
        )
    }

    /// Pixel coordinates, y pointing down.
    fn map(&self, p: Point2) -> (f64, f64) {
        (
            self.margin + (p.x - self.min.x) * self.scale,
            self.height - self.margin - (p.y - self.min.y) * self.scale,
        )
    }
}

/// Render up to two trajectories sharing the node count into one SVG.
pub fn render_svg(trajs: &[Trajectory], style: &RenderStyle) -> Result<String> {
    style.validate()?;
    match trajs {
        [] => return Err(DloError::InvalidInput("nothing to render".into())),
        [_] | [_, _] => {}
        _ => {
            return Err(DloError::InvalidInput(
                "at most two trajectories can be overlaid".into(),
            ))
        }
    }
    let n = trajs[0].n_nodes();
    for t in &trajs[1..] {
        if t.n_nodes() != n {
            return Err(DloError::NodeCountMismatch {
                expected: n,
                found: t.n_nodes(),
            });
        }
    }
    let (frame, width, height) = Frame::fit(trajs, style);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{width:.1}" height="{height:.1}" fill="#ffffff"/>"##
    );
    for (k, traj) in trajs.iter().enumerate() {
        let dashed = k == 1;
        let dash = if dashed {
            format!(r#" stroke-dasharray="{}""#, style.baseline_dash_pattern)
        } else {
            String::new()
        };
        let _ = writeln!(
            svg,
            r#"<g class="{}" fill="none" stroke-width="{:.2}" stroke-linejoin="round"{dash}>"#,
            if dashed { "baseline" } else { "primary" },
            style.stroke_width
        );
        let last = traj.len() - 1;
        for (t, step) in traj.steps().iter().enumerate() {
            let (color, opacity) = if t == 0 {
                (&style.start_color, 1.0)
            } else if t == last {
                (&style.target_color, 1.0)
            } else {
                // Fades in as the trajectory progresses.
                (&style.intermediate_color, 0.25 + 0.6 * t as f64 / last as f64)
            };
            let pts: Vec<String> = step
                .nodes()
                .iter()
                .map(|p| {
                    let (x, y) = frame.map(*p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline data-step="{t}" stroke="{color}" stroke-opacity="{opacity:.3}" points="{}"/>"#,
                pts.join(" ")
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
