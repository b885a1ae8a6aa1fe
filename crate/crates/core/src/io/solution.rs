//! Solution files: radii, centers and a diagnostics block.
//!
//! Every residual in [`Diagnostics`] is a function of the stored radii and
//! centers, so [`recompute_diagnostics`] can audit a file against its problem.

use serde::{Deserialize, Serialize};

use super::problem::Problem;
use crate::center::{
    harmonic_residual, layout_boundary, max_edge_length_mismatch, max_overlap_error, Point,
};
use crate::geometry::{curvatures, stiffness, DegenerateTriangle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub radius_iterations: usize,
    pub radius_converged: bool,
    /// `‖∇E‖₂` in log-radius coordinates.
    pub gradient_norm: f64,
    pub max_abs_curvature: f64,
    pub energy: f64,
    pub closure_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_iterations_x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_iterations_y: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_edge_length_mismatch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_overlap_angle_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub radii: Vec<f64>,
    /// Absent when the radius stage did not converge or the center stage failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Point>>,
    pub diagnostics: Diagnostics,
}

impl SolutionFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Residuals that depend only on the problem, the radii and the centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub gradient_norm: f64,
    pub max_abs_curvature: f64,
    pub energy: f64,
    pub closure_error: f64,
    pub harmonic_residual: Option<f64>,
    pub max_edge_length_mismatch: Option<f64>,
    pub max_overlap_angle_error: Option<f64>,
}

impl Residuals {
    /// Largest absolute difference from the residual fields of `d`, or
    /// infinity when one side has a center residual the other lacks.
    pub fn max_difference(&self, d: &Diagnostics) -> f64 {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        [
            (self.gradient_norm - d.gradient_norm).abs(),
            (self.max_abs_curvature - d.max_abs_curvature).abs(),
            (self.energy - d.energy).abs(),
            (self.closure_error - d.closure_error).abs(),
            opt(self.harmonic_residual, d.harmonic_residual),
            opt(self.max_edge_length_mismatch, d.max_edge_length_mismatch),
            opt(self.max_overlap_angle_error, d.max_overlap_angle_error),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates every residual for `radii` (and `centers`, when present).
pub fn recompute_diagnostics(
    problem: &Problem,
    radii: &[f64],
    centers: Option<&[Point]>,
) -> Result<Residuals, DegenerateTriangle> {
    let t = &problem.triangulation;
    let w = &problem.weights;
    let log_radii: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let k = curvatures(t, w, &log_radii)?;
    let c = stiffness(t, w, &log_radii)?;
    let mut g = vec![0.0; k.len()];
    c.apply(&k, &mut g);
    let gradient_norm = 2.0 * g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let closure_error = layout_boundary(t, w, radii).closure_error;
    Ok(Residuals {
        gradient_norm,
        max_abs_curvature: k.iter().fold(0.0, |m, x| m.max(x.abs())),
        energy: k.iter().map(|x| x * x).sum(),
        closure_error,
        harmonic_residual: centers.map(|z| harmonic_residual(t, &c, z)),
        max_edge_length_mismatch: centers.map(|z| max_edge_length_mismatch(t, w, radii, z)),
        max_overlap_angle_error: centers.map(|z| max_overlap_error(t, w, radii, z)),
    })
}
