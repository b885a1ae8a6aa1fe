//! End-to-end solve: radii first, then centers, then diagnostics.

use std::time::Instant;

use crate::center::{layout, CenterError, CenterOptions, Layout};
use crate::geometry::RadiusState;
use crate::io::problem::Problem;
use crate::io::solution::{recompute_diagnostics, Diagnostics, SolutionFile};
use crate::radius::{solve_radii, RadiusError, RadiusSolveConfig, RadiusSolveReport};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOptions {
    pub radius: RadiusSolveConfig,
    pub center: CenterOptions,
    /// Record wall time in the diagnostics. Off by default so that repeated
    /// runs produce identical files.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    RadiusNotConverged,
    CenterFailed(CenterError),
}

impl Status {
    /// Process exit code for this outcome.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::RadiusNotConverged => 2,
            Status::CenterFailed(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub radius_report: RadiusSolveReport,
    pub layout: Option<Layout>,
    pub solution: SolutionFile,
}

/// Runs both stages. The center stage is skipped when the radii did not
/// converge; diagnostics are filled in either way.
pub fn solve(problem: &Problem, opts: &SolveOptions) -> Result<Outcome, RadiusError> {
    let started = Instant::now();
    let t = &problem.triangulation;
    let w = &problem.weights;
    let initial = match &problem.initial_radii {
        Some(r) => RadiusState::from_radii(r),
        None => RadiusState::uniform(t.vertex_count()),
    };
    let (state, report) = solve_radii(t, w, initial, &opts.radius)?;
    let radii = state.radii();

    let (status, layout) = if !report.converged {
        (Status::RadiusNotConverged, None)
    } else {
        match layout(t, w, &radii, &opts.center) {
            Ok(l) => (Status::Converged, Some(l)),
            Err(e) => (Status::CenterFailed(e), None),
        }
    };

    let centers = layout.as_ref().map(|l| l.centers().to_vec());
    let residuals = recompute_diagnostics(problem, &radii, centers.as_deref())
        .expect("accepted radii keep every face constructible");
    let [cg_x, cg_y] = layout
        .as_ref()
        .map_or([None, None], |l| l.cg_iterations().map(Some));
    let diagnostics = Diagnostics {
        radius_iterations: report.iterations,
        radius_converged: report.converged,
        gradient_norm: residuals.gradient_norm,
        max_abs_curvature: residuals.max_abs_curvature,
        energy: residuals.energy,
        closure_error: residuals.closure_error,
        cg_iterations_x: cg_x,
        cg_iterations_y: cg_y,
        harmonic_residual: residuals.harmonic_residual,
        max_edge_length_mismatch: residuals.max_edge_length_mismatch,
        max_overlap_angle_error: residuals.max_overlap_angle_error,
        wall_time_seconds: opts.timing.then(|| started.elapsed().as_secs_f64()),
    };
    Ok(Outcome {
        status,
        radius_report: report,
        layout,
        solution: SolutionFile {
            radii,
            centers,
            diagnostics,
        },
    })
}
