//! Radius stage: drive the curvature energy `E = Σ K_v²` to zero.
//!
//! The iteration runs in log-radius coordinates `u = log r`, where the
//! curvature Jacobian `J` is the symmetric [`StiffnessMatrix`] and
//! `∇E = 2 J K`. Two update rules are available: gradient descent with a
//! fixed step and backtracking, and damped Gauss-Newton (Levenberg-Marquardt)
//! steps solved with the conjugate gradient kernel.

use thiserror::Error;

use crate::cg::{conjugate_gradient, CgOptions, LinearOperator, Preconditioner};
use crate::geometry::{curvatures, stiffness, DegenerateTriangle, RadiusState, StiffnessMatrix};
use crate::mesh::{PatternWeights, Triangulation};

/// Maximum number of step halvings (or damping increases) per iteration.
pub const MAX_BACKTRACKS: usize = 30;

const LM_DAMPING_MIN: f64 = 1e-12;
const LM_DAMPING_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusMode {
    #[default]
    GradientDescent,
    LevenbergMarquardt,
}

/// Coordinates in which gradient steps are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSpace {
    #[default]
    LogRadius,
    /// The literal `r ← r − η ∇_r E` update. Only affects gradient descent.
    Radius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSolveConfig {
    pub step_size: f64,
    /// Bound on the gradient 2-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub mode: RadiusMode,
    pub lm_damping_init: f64,
    pub space: StepSpace,
    pub record_trace: bool,
}

impl Default for RadiusSolveConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            tolerance: 1e-9,
            max_iterations: 100_000,
            mode: RadiusMode::GradientDescent,
            lm_damping_init: 1e-3,
            space: StepSpace::LogRadius,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSolveReport {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub max_curvature: f64,
    pub energy: f64,
    pub converged: bool,
    /// Set when an iteration could not decrease the energy.
    pub stalled: bool,
    /// Energy after each accepted iteration, starting with the initial state.
    pub energy_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadiusError {
    #[error("initial radii are not admissible: {0}")]
    DegenerateInitialState(DegenerateTriangle),
    #[error("expected {expected} initial radii, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
}

/// `Σ_v K_v²` at the given log-radii.
pub fn energy(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
) -> Result<f64, DegenerateTriangle> {
    Ok(curvatures(t, w, log_radii)?.iter().map(|k| k * k).sum())
}

fn gradient_from(jacobian: &StiffnessMatrix, k: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; k.len()];
    jacobian.apply(k, &mut g);
    for x in &mut g {
        *x *= 2.0;
    }
    g
}

/// Gradient of the energy with respect to the log-radii, `2 J K`.
pub fn energy_gradient(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
) -> Result<Vec<f64>, DegenerateTriangle> {
    let k = curvatures(t, w, log_radii)?;
    let j = stiffness(t, w, log_radii)?;
    Ok(gradient_from(&j, &k))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Curvature, Jacobian and gradient at one point.
struct Evaluation {
    log_radii: Vec<f64>,
    curvatures: Vec<f64>,
    energy: f64,
    jacobian: StiffnessMatrix,
    gradient: Vec<f64>,
}

impl Evaluation {
    fn at(
        t: &Triangulation,
        w: &PatternWeights,
        log_radii: Vec<f64>,
    ) -> Result<Self, DegenerateTriangle> {
        let k = curvatures(t, w, &log_radii)?;
        let jacobian = stiffness(t, w, &log_radii)?;
        let gradient = gradient_from(&jacobian, &k);
        Ok(Self {
            energy: k.iter().map(|x| x * x).sum(),
            log_radii,
            curvatures: k,
            jacobian,
            gradient,
        })
    }

    /// Gradient in the coordinates the convergence test is stated in.
    fn gradient_norm(&self, space: StepSpace) -> f64 {
        match space {
            StepSpace::LogRadius => norm(&self.gradient),
            StepSpace::Radius => self
                .gradient
                .iter()
                .zip(&self.log_radii)
                .map(|(g, u)| (g / u.exp()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// `(J² + λI) δ` for the damped normal equations.
struct DampedNormal<'a> {
    jacobian: &'a StiffnessMatrix,
    damping: f64,
}

impl LinearOperator for DampedNormal<'_> {
    fn dim(&self) -> usize {
        self.jacobian.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut jx = vec![0.0; x.len()];
        self.jacobian.apply(x, &mut jx);
        self.jacobian.apply(&jx, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.damping * xi;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        // (J²)_ii = d_i² + Σ_j c_ij²
        let mut d: Vec<f64> = self.jacobian.diagonal().iter().map(|x| x * x).collect();
        for (&(u, v), &c) in self
            .jacobian
            .edges()
            .iter()
            .zip(self.jacobian.off_diagonal())
        {
            d[u] += c * c;
            d[v] += c * c;
        }
        d.iter().map(|x| x + self.damping).collect()
    }
}

fn lm_direction(eval: &Evaluation, damping: f64) -> Vec<f64> {
    let n = eval.log_radii.len();
    let op = DampedNormal {
        jacobian: &eval.jacobian,
        damping,
    };
    // −Jᵀ K = −∇E / 2
    let rhs: Vec<f64> = eval.gradient.iter().map(|g| -0.5 * g).collect();
    let opts = CgOptions {
        tolerance: 1e-12 * norm(&rhs).max(f64::MIN_POSITIVE),
        max_iterations: 10 * n.max(1),
        preconditioner: Preconditioner::None,
    };
    conjugate_gradient(&op, &rhs, vec![0.0; n], &opts).solution
}

fn trial_point(eval: &Evaluation, cfg: &RadiusSolveConfig, step: f64) -> Option<Vec<f64>> {
    match cfg.space {
        StepSpace::LogRadius => Some(
            eval.log_radii
                .iter()
                .zip(&eval.gradient)
                .map(|(u, g)| u - step * g)
                .collect(),
        ),
        StepSpace::Radius => eval
            .log_radii
            .iter()
            .zip(&eval.gradient)
            .map(|(u, g)| {
                let r = u.exp();
                let next = r - step * g / r;
                (next > 0.0 && next.is_finite()).then(|| next.ln())
            })
            .collect(),
    }
}

/// Minimizes `Σ K_v²` starting from `initial`.
///
/// Stops as soon as the gradient norm drops below `cfg.tolerance`. Hitting
/// `max_iterations` (or failing to find a decreasing step) is not an error:
/// the best state is returned with `converged == false`.
pub fn solve_radii(
    t: &Triangulation,
    w: &PatternWeights,
    initial: RadiusState,
    cfg: &RadiusSolveConfig,
) -> Result<(RadiusState, RadiusSolveReport), RadiusError> {
    if !(cfg.tolerance > 0.0) {
        return Err(RadiusError::InvalidConfig("tolerance must be positive"));
    }
    if !(cfg.step_size > 0.0) {
        return Err(RadiusError::InvalidConfig("step size must be positive"));
    }
    if cfg.max_iterations == 0 {
        return Err(RadiusError::InvalidConfig("max_iterations must be at least 1"));
    }
    if !(cfg.lm_damping_init > 0.0) {
        return Err(RadiusError::InvalidConfig("damping must be positive"));
    }
    if initial.log_radii.len() != t.vertex_count() {
        return Err(RadiusError::WrongLength {
            expected: t.vertex_count(),
            got: initial.log_radii.len(),
        });
    }

    let mut eval = Evaluation::at(t, w, initial.log_radii)
        .map_err(RadiusError::DegenerateInitialState)?;
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(eval.energy);
    }
    let mut damping = cfg.lm_damping_init;
    let mut iterations = 0;
    let mut stalled = false;

    while eval.gradient_norm(cfg.space) >= cfg.tolerance && iterations < cfg.max_iterations {
        let next = match cfg.mode {
            RadiusMode::GradientDescent => {
                let mut step = cfg.step_size;
                let mut accepted = None;
                for _ in 0..=MAX_BACKTRACKS {
                    if let Some(u) = trial_point(&eval, cfg, step) {
                        if let Ok(trial) = Evaluation::at(t, w, u) {
                            if trial.energy < eval.energy {
                                accepted = Some(trial);
                                break;
                            }
                        }
                    }
                    step *= 0.5;
                }
                accepted
            }
            RadiusMode::LevenbergMarquardt => {
                let mut accepted = None;
                for _ in 0..=MAX_BACKTRACKS {
                    let delta = lm_direction(&eval, damping);
                    let u: Vec<f64> = eval.log_radii.iter().zip(&delta).map(|(a, b)| a + b).collect();
                    match Evaluation::at(t, w, u) {
                        Ok(trial) if trial.energy < eval.energy => {
                            damping = (damping / 10.0).max(LM_DAMPING_MIN);
                            accepted = Some(trial);
                            break;
                        }
                        _ => damping = (damping * 10.0).min(LM_DAMPING_MAX),
                    }
                }
                accepted
            }
        };
        match next {
            Some(trial) => {
                eval = trial;
                iterations += 1;
                if cfg.record_trace {
                    trace.push(eval.energy);
                }
            }
            None => {
                stalled = true;
                break;
            }
        }
    }

    let gradient_norm = eval.gradient_norm(cfg.space);
    let report = RadiusSolveReport {
        iterations,
        gradient_norm,
        max_curvature: max_abs(&eval.curvatures),
        energy: eval.energy,
        converged: gradient_norm < cfg.tolerance,
        stalled,
        energy_trace: trace,
    };
    let state = RadiusState {
        log_radii: eval.log_radii,
        curvatures: eval.curvatures,
        energy: eval.energy,
    };
    Ok((state, report))
}
