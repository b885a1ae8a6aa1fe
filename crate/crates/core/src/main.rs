use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use circle_pattern::cg::Preconditioner;
use circle_pattern::io::{parse_problem, recompute_diagnostics, render_svg, Problem, SolutionFile, SvgOptions};
use circle_pattern::pipeline::{solve, SolveOptions, Status};
use circle_pattern::radius::{RadiusMode, StepSpace};
use circle_pattern::{generate_hex_disk, CenterOptions, RadiusSolveConfig};

/// Tolerance used by `check` when comparing stored and recomputed residuals.
const CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "circle-pattern", version, about = "Planar circle patterns on triangulated disks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gd,
    Lm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precondition {
    None,
    Jacobi,
}

#[derive(Subcommand)]
enum Command {
    /// Compute radii and centers for a problem file.
    Solve {
        problem: PathBuf,
        /// Stop when the energy gradient norm drops below this.
        #[arg(long = "tol", default_value_t = 1e-9)]
        tol: f64,
        /// Gradient descent step size.
        #[arg(long = "step", default_value_t = 0.1)]
        step: f64,
        #[arg(long = "max-iter", default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "gd")]
        mode: Mode,
        /// Initial damping for `--mode lm`.
        #[arg(long = "lm-damping", default_value_t = 1e-3)]
        lm_damping: f64,
        /// Absolute residual tolerance of the center CG solves.
        #[arg(long = "cg-tol", default_value_t = 1e-12)]
        cg_tol: f64,
        #[arg(long = "cg-max-iter")]
        cg_max_iter: Option<usize>,
        #[arg(long, value_enum, default_value = "none")]
        precondition: Precondition,
        /// Take gradient steps in radius rather than log-radius coordinates.
        #[arg(long = "r-space")]
        r_space: bool,
        /// Write the solution here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Draw triangulation edges in the SVG.
        #[arg(long)]
        edges: bool,
        /// Record wall time in the diagnostics.
        #[arg(long)]
        timing: bool,
    },
    /// Recompute the residuals of a solution file and compare.
    Check { problem: PathBuf, solution: PathBuf },
    /// Write the hexagonal lattice disk problem with the given number of rings.
    Hex {
        generations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_problem(path: &PathBuf) -> Result<Problem, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Solve {
            problem,
            tol,
            step,
            max_iter,
            mode,
            lm_damping,
            cg_tol,
            cg_max_iter,
            precondition,
            r_space,
            out,
            svg,
            edges,
            timing,
        } => {
            let problem = match read_problem(&problem) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            };
            let opts = SolveOptions {
                radius: RadiusSolveConfig {
                    step_size: step,
                    tolerance: tol,
                    max_iterations: max_iter,
                    mode: match mode {
                        Mode::Gd => RadiusMode::GradientDescent,
                        Mode::Lm => RadiusMode::LevenbergMarquardt,
                    },
                    lm_damping_init: lm_damping,
                    space: if r_space {
                        StepSpace::Radius
                    } else {
                        StepSpace::LogRadius
                    },
                    record_trace: false,
                },
                center: CenterOptions {
                    cg_tolerance: cg_tol,
                    cg_max_iterations: cg_max_iter,
                    preconditioner: match precondition {
                        Precondition::None => Preconditioner::None,
                        Precondition::Jacobi => Preconditioner::Jacobi,
                    },
                    start: None,
                },
                timing,
            };
            let outcome = match solve(&problem, &opts) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("radius stage failed: {e}");
                    return Ok(2);
                }
            };
            let json = outcome.solution.to_json();
            write_or_print(out.as_ref(), &json)?;
            if out.is_some() {
                eprintln!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.solution.diagnostics)
                        .expect("diagnostics serialize")
                );
            }
            if let (Some(path), Some(centers)) = (svg, outcome.solution.centers.as_ref()) {
                let svg_opts = SvgOptions {
                    edges: if edges {
                        problem.triangulation.edges().to_vec()
                    } else {
                        Vec::new()
                    },
                };
                let text = render_svg(centers, &outcome.solution.radii, &svg_opts);
                fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            match &outcome.status {
                Status::Converged => {}
                Status::RadiusNotConverged => eprintln!(
                    "radius stage did not converge after {} iterations (gradient norm {:e})",
                    outcome.radius_report.iterations, outcome.radius_report.gradient_norm
                ),
                Status::CenterFailed(e) => eprintln!("center stage failed: {e}"),
            }
            Ok(outcome.status.exit_code() as u8)
        }
        Command::Check { problem, solution } => {
            let problem = match read_problem(&problem) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            };
            let text =
                fs::read_to_string(&solution).map_err(|e| format!("{}: {e}", solution.display()))?;
            let sol = match SolutionFile::from_json(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", solution.display());
                    return Ok(1);
                }
            };
            if sol.radii.len() != problem.triangulation.vertex_count()
                || sol.radii.iter().any(|r| !(*r > 0.0))
            {
                eprintln!("solution radii do not fit the problem");
                return Ok(1);
            }
            let residuals = match recompute_diagnostics(&problem, &sol.radii, sol.centers.as_deref()) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            };
            let diff = residuals.max_difference(&sol.diagnostics);
            println!("max difference between stored and recomputed residuals: {diff:e}");
            Ok(if diff <= CHECK_TOLERANCE { 0 } else { 1 })
        }
        Command::Hex { generations, out } => {
            let (t, w) = match generate_hex_disk(generations) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(1);
                }
            };
            let problem = Problem::new(t, w, None).map_err(|e| e.to_string())?;
            write_or_print(out.as_ref(), &problem.to_json())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
