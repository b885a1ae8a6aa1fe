//! Center stage: propagate the boundary from the prescribed corner angles,
//! then place interior centers at the minimizer of the weighted Dirichlet
//! energy, where every interior center is the `c`-weighted average of its
//! neighbors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cg::{conjugate_gradient, CgOptions, CsrMatrix, Preconditioner};
use crate::geometry::{edge_length, stiffness, DegenerateTriangle, StiffnessMatrix};
use crate::mesh::{PatternWeights, Triangulation};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CenterError {
    #[error(transparent)]
    Degenerate(#[from] DegenerateTriangle),
    #[error("interior vertex {vertex} has total incident weight {weight} <= 0")]
    SingularSystem { vertex: usize, weight: f64 },
    #[error("conjugate gradient stalled on the {axis} axis after {iterations} iterations (residual {residual:e})")]
    CgStalled {
        axis: char,
        iterations: usize,
        residual: f64,
    },
    #[error("expected {expected} radii, got {got}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterOptions {
    /// Absolute bound on the CG residual 2-norm, per axis.
    pub cg_tolerance: f64,
    /// Defaults to ten times the number of interior vertices.
    pub cg_max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
    /// Start vector for both axes; all ones when absent.
    pub start: Option<Vec<Point>>,
}

impl Default for CenterOptions {
    fn default() -> Self {
        Self {
            cg_tolerance: 1e-12,
            cg_max_iterations: None,
            preconditioner: Preconditioner::None,
            start: None,
        }
    }
}

/// Boundary centers placed by propagation around the boundary cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLayout {
    /// Centers in boundary-cycle order.
    pub centers: Vec<Point>,
    /// Distance from the re-derived position of the first boundary center
    /// to the origin.
    pub closure_error: f64,
}

/// Center of `w`, given its predecessors `u`, `v` on a counterclockwise
/// boundary, the interior angle at `v` and the length `|vw|`.
pub fn next_boundary_center(u: Point, v: Point, angle_at_v: f64, length_vw: f64) -> Point {
    let back = (u.y - v.y).atan2(u.x - v.x);
    let dir = back - angle_at_v;
    Point::new(v.x + length_vw * dir.cos(), v.y + length_vw * dir.sin())
}

fn boundary_edge_length(t: &Triangulation, w: &PatternWeights, radii: &[f64], a: usize, b: usize) -> f64 {
    let e = t.edge_id(a, b).expect("consecutive boundary vertices share an edge");
    edge_length(radii[a], radii[b], w.overlap(e))
}

/// Pins the first boundary vertex at the origin and the second on the
/// positive x-axis, then turns by `θ_v` at each subsequent vertex.
pub fn layout_boundary(t: &Triangulation, w: &PatternWeights, radii: &[f64]) -> BoundaryLayout {
    let cycle = t.boundary_cycle();
    let m = cycle.len();
    let mut centers = Vec::with_capacity(m);
    centers.push(Point::new(0.0, 0.0));
    centers.push(Point::new(boundary_edge_length(t, w, radii, cycle[0], cycle[1]), 0.0));
    // i walks the middle vertex; the last pass re-derives cycle[0]
    let mut closing = centers[0];
    for i in 1..m {
        let (v, nxt) = (cycle[i], cycle[(i + 1) % m]);
        let theta = w.boundary_angle(v).expect("boundary vertex has an angle");
        let l = boundary_edge_length(t, w, radii, v, nxt);
        let p = next_boundary_center(centers[i - 1], centers[i], theta, l);
        if i + 1 < m {
            centers.push(p);
        } else {
            closing = p;
        }
    }
    let closure_error = closing.distance(centers[0]);
    BoundaryLayout {
        centers,
        closure_error,
    }
}

/// `Σ_{uv ∈ E} c_uv |z_u − z_v|²`.
pub fn dirichlet_energy(t: &Triangulation, c: &StiffnessMatrix, centers: &[Point]) -> f64 {
    t.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let d = centers[u].distance(centers[v]);
            c.coefficient(e) * d * d
        })
        .sum()
}

/// Linear system for the interior centers with the boundary held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorSystem {
    /// Interior vertex for each row.
    pub vertices: Vec<usize>,
    pub matrix: CsrMatrix,
    pub rhs_x: Vec<f64>,
    pub rhs_y: Vec<f64>,
}

/// Row `v`: `Σ_u c_uv` on the diagonal, `−c_uv` for interior neighbors,
/// and `Σ c_uv z_u` over boundary neighbors on the right.
pub fn assemble_interior_system(
    t: &Triangulation,
    c: &StiffnessMatrix,
    centers: &[Option<Point>],
) -> Result<InteriorSystem, CenterError> {
    let vertices = t.interior_vertices().to_vec();
    let mut row_of = vec![usize::MAX; t.vertex_count()];
    for (i, &v) in vertices.iter().enumerate() {
        row_of[v] = i;
    }
    let n = vertices.len();
    let mut trip = Vec::new();
    let mut rhs_x = vec![0.0; n];
    let mut rhs_y = vec![0.0; n];
    for (i, &v) in vertices.iter().enumerate() {
        let mut weight = 0.0;
        for &(u, e) in t.neighbors(v) {
            let cuv = c.coefficient(e);
            weight += cuv;
            if t.is_boundary(u) {
                let z = centers[u].expect("boundary centers are fixed before assembly");
                rhs_x[i] += cuv * z.x;
                rhs_y[i] += cuv * z.y;
            } else {
                trip.push((i, row_of[u], -cuv));
            }
        }
        if !(weight > 0.0) {
            return Err(CenterError::SingularSystem { vertex: v, weight });
        }
        trip.push((i, i, weight));
    }
    Ok(InteriorSystem {
        vertices,
        matrix: CsrMatrix::from_triplets(n, &trip),
        rhs_x,
        rhs_y,
    })
}

/// One CG solve of an assembled axis; fails with `CgStalled` at the cap.
pub fn solve_centers_cg(
    matrix: &CsrMatrix,
    rhs: &[f64],
    start: Vec<f64>,
    opts: &CgOptions,
) -> Result<(Vec<f64>, usize), (Vec<f64>, usize, f64)> {
    let out = conjugate_gradient(matrix, rhs, start, opts);
    if out.converged {
        Ok((out.solution, out.iterations))
    } else {
        Err((out.solution, out.iterations, out.residual_norm))
    }
}

/// Max over interior vertices of `|Σ_{u∼v} c_uv (z_u − z_v)|`.
pub fn harmonic_residual(t: &Triangulation, c: &StiffnessMatrix, centers: &[Point]) -> f64 {
    t.interior_vertices()
        .iter()
        .map(|&v| {
            let (mut sx, mut sy) = (0.0, 0.0);
            for &(u, e) in t.neighbors(v) {
                sx += c.coefficient(e) * (centers[u].x - centers[v].x);
                sy += c.coefficient(e) * (centers[u].y - centers[v].y);
            }
            sx.hypot(sy)
        })
        .fold(0.0, f64::max)
}

/// Completed center layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    centers: Vec<Point>,
    closure_error: f64,
    harmonic_residual: f64,
    cg_iterations: [usize; 2],
}

impl Layout {
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn closure_error(&self) -> f64 {
        self.closure_error
    }

    pub fn harmonic_residual(&self) -> f64 {
        self.harmonic_residual
    }

    /// CG iterations for the x and y axes.
    pub fn cg_iterations(&self) -> [usize; 2] {
        self.cg_iterations
    }

    pub fn into_centers(self) -> Vec<Point> {
        self.centers
    }
}

/// Full center stage for the given radii.
pub fn layout(
    t: &Triangulation,
    w: &PatternWeights,
    radii: &[f64],
    opts: &CenterOptions,
) -> Result<Layout, CenterError> {
    if radii.len() != t.vertex_count() {
        return Err(CenterError::WrongLength {
            expected: t.vertex_count(),
            got: radii.len(),
        });
    }
    let log_radii: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let c = stiffness(t, w, &log_radii)?;
    let boundary = layout_boundary(t, w, radii);

    let mut fixed = vec![None; t.vertex_count()];
    for (&v, &z) in t.boundary_cycle().iter().zip(&boundary.centers) {
        fixed[v] = Some(z);
    }
    let system = assemble_interior_system(t, &c, &fixed)?;
    let n = system.vertices.len();
    let cg = CgOptions {
        tolerance: opts.cg_tolerance,
        max_iterations: opts.cg_max_iterations.unwrap_or(10 * n),
        preconditioner: opts.preconditioner,
    };
    let (start_x, start_y): (Vec<f64>, Vec<f64>) = match &opts.start {
        Some(start) => system.vertices.iter().map(|&v| (start[v].x, start[v].y)).unzip(),
        None => (vec![1.0; n], vec![1.0; n]),
    };
    let stalled = |axis| {
        move |(_, iterations, residual)| CenterError::CgStalled {
            axis,
            iterations,
            residual,
        }
    };
    let (xs, it_x) = solve_centers_cg(&system.matrix, &system.rhs_x, start_x, &cg).map_err(stalled('x'))?;
    let (ys, it_y) = solve_centers_cg(&system.matrix, &system.rhs_y, start_y, &cg).map_err(stalled('y'))?;

    let mut centers: Vec<Point> = fixed.into_iter().map(Option::unwrap_or_default).collect();
    for ((&v, x), y) in system.vertices.iter().zip(xs).zip(ys) {
        centers[v] = Point::new(x, y);
    }
    let harmonic_residual = harmonic_residual(t, &c, &centers);
    Ok(Layout {
        centers,
        closure_error: boundary.closure_error,
        harmonic_residual,
        cg_iterations: [it_x, it_y],
    })
}

/// Overlap angle of two circles whose centers are `d` apart.
pub fn recovered_overlap(d: f64, r_u: f64, r_v: f64) -> f64 {
    ((d * d - r_u * r_u - r_v * r_v) / (2.0 * r_u * r_v))
        .clamp(-1.0, 1.0)
        .acos()
}

/// Max over edges of `| |z_u − z_v| − l_uv | / l_uv`.
pub fn max_edge_length_mismatch(
    t: &Triangulation,
    w: &PatternWeights,
    radii: &[f64],
    centers: &[Point],
) -> f64 {
    t.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let l = edge_length(radii[u], radii[v], w.overlap(e));
            (centers[u].distance(centers[v]) - l).abs() / l
        })
        .fold(0.0, f64::max)
}

/// Max over edges of the gap between recovered and prescribed overlap angles.
pub fn max_overlap_error(
    t: &Triangulation,
    w: &PatternWeights,
    radii: &[f64],
    centers: &[Point],
) -> f64 {
    t.edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let d = centers[u].distance(centers[v]);
            (recovered_overlap(d, radii[u], radii[v]) - w.overlap(e)).abs()
        })
        .fold(0.0, f64::max)
}
