//! File formats: problem and solution JSON, angle tokens, SVG output.

mod angle;
pub mod problem;
pub mod solution;
pub mod svg;

pub use angle::{parse_angle, AngleParseError};
pub use problem::{parse_problem, Problem, ProblemError, ProblemFile};
pub use solution::{recompute_diagnostics, Diagnostics, SolutionFile};
pub use svg::{render_svg, SvgOptions};
