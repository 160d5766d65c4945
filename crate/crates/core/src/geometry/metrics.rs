use super::{Configuration, DloParams, Point2, Trajectory};
use crate::error::{DloError, Result};

/// Worst absolute deviation of any step's polyline length from the rest length.
pub fn max_length_error(traj: &Trajectory, params: &DloParams) -> Result<f64> {
    traj.first().check_nodes(params.n_nodes())?;
    Ok(traj
        .steps()
        .iter()
        .map(|c| (c.arc_length() - params.total_rest_length()).abs())
        .fold(0.0, f64::max))
}

/// Per-node straight-line interpolation from `start` to `target` over
/// `n_steps` steps. The first and last steps are exact copies of the inputs.
pub fn build_guide(
    start: &Configuration,
    target: &Configuration,
    n_steps: usize,
) -> Result<Trajectory> {
    target.check_nodes(start.len())?;
    if n_steps < 2 {
        return Err(DloError::InvalidInput(format!(
            "T must be at least 2, got {n_steps}"
        )));
    }
    let last = n_steps - 1;
    let mut steps = Vec::with_capacity(n_steps);
    steps.push(start.clone());
    for t in 1..last {
        let s = t as f64 / last as f64;
        let nodes: Vec<Point2> = start
            .nodes()
            .iter()
            .zip(target.nodes())
            .map(|(a, b)| *a + (*b - *a) * s)
            .collect();
        steps.push(Configuration::new(nodes)?);
    }
    steps.push(target.clone());
    Trajectory::new(steps)
}

/// Sum of squared node-to-node distances.
pub fn shape_error(c: &Configuration, target: &Configuration) -> Result<f64> {
    target.check_nodes(c.len())?;
    Ok(c.nodes()
        .iter()
        .zip(target.nodes())
        .map(|(a, b)| (*a - *b).norm_squared())
        .sum())
}
