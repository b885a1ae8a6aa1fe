//! Pointwise Euclidean formulas: lengths, angles, areas, curvature and the
//! curvature Jacobian in log-radius coordinates.

use std::f64::consts::PI;

use thiserror::Error;

use crate::mesh::{PatternWeights, Triangulation};

/// Slack allowed when clamping a law-of-cosines ratio into `[-1, 1]`.
pub const ARCCOS_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("degenerate triangle with sides {sides:?}{}", face.map(|f| format!(" (face {f})")).unwrap_or_default())]
pub struct DegenerateTriangle {
    pub sides: [f64; 3],
    pub face: Option<usize>,
}

impl DegenerateTriangle {
    fn in_face(mut self, face: usize) -> Self {
        self.face = Some(face);
        self
    }
}

/// Distance between the centers of two circles meeting at overlap angle `theta`.
#[inline]
pub fn edge_length(r_u: f64, r_v: f64, theta: f64) -> f64 {
    (r_u * r_u + r_v * r_v + 2.0 * r_u * r_v * theta.cos()).sqrt()
}

/// `cos Θ_vw + cos Θ_uv · cos Θ_uw` for the corner `u` of face `uvw`.
#[inline]
pub fn intersection_coefficient(theta_vw: f64, theta_uv: f64, theta_uw: f64) -> f64 {
    theta_vw.cos() + theta_uv.cos() * theta_uw.cos()
}

fn check_sides(a: f64, b: f64, c: f64) -> Result<(), DegenerateTriangle> {
    let ok = a > 0.0 && b > 0.0 && c > 0.0 && a < b + c && b < a + c && c < a + b;
    if ok {
        Ok(())
    } else {
        Err(DegenerateTriangle {
            sides: [a, b, c],
            face: None,
        })
    }
}

fn clamped_acos(x: f64, sides: [f64; 3]) -> Result<f64, DegenerateTriangle> {
    if x.abs() <= 1.0 {
        Ok(x.acos())
    } else if x.abs() <= 1.0 + ARCCOS_CLAMP {
        Ok(x.clamp(-1.0, 1.0).acos())
    } else {
        Err(DegenerateTriangle { sides, face: None })
    }
}

/// Angles opposite the sides `a`, `b` and `c`, by the law of cosines.
pub fn triangle_angles(a: f64, b: f64, c: f64) -> Result<[f64; 3], DegenerateTriangle> {
    check_sides(a, b, c)?;
    let sides = [a, b, c];
    let (a2, b2, c2) = (a * a, b * b, c * c);
    Ok([
        clamped_acos((b2 + c2 - a2) / (2.0 * b * c), sides)?,
        clamped_acos((a2 + c2 - b2) / (2.0 * a * c), sides)?,
        clamped_acos((a2 + b2 - c2) / (2.0 * a * b), sides)?,
    ])
}

/// Heron's formula with Kahan's ordering, stable for needle-like triangles.
pub fn triangle_area(a: f64, b: f64, c: f64) -> Result<f64, DegenerateTriangle> {
    check_sides(a, b, c)?;
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        return Err(DegenerateTriangle {
            sides: s,
            face: None,
        });
    }
    Ok(0.25 * p.sqrt())
}

/// Per-vertex log-radii together with the curvature and energy last
/// evaluated for them.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusState {
    pub log_radii: Vec<f64>,
    pub curvatures: Vec<f64>,
    pub energy: f64,
}

impl RadiusState {
    pub fn from_log_radii(log_radii: Vec<f64>) -> Self {
        Self {
            log_radii,
            curvatures: Vec::new(),
            energy: f64::NAN,
        }
    }

    /// Panics if a radius is not finite and positive.
    pub fn from_radii(radii: &[f64]) -> Self {
        assert!(
            radii.iter().all(|r| r.is_finite() && *r > 0.0),
            "radii must be finite and positive"
        );
        Self::from_log_radii(radii.iter().map(|r| r.ln()).collect())
    }

    /// All radii equal to one.
    pub fn uniform(n: usize) -> Self {
        Self::from_log_radii(vec![0.0; n])
    }

    pub fn radii(&self) -> Vec<f64> {
        self.log_radii.iter().map(|u| u.exp()).collect()
    }
}

/// Corner angles of face `f`, the `i`-th at `faces[f][i]`.
pub(crate) fn face_angles(
    t: &Triangulation,
    w: &PatternWeights,
    radii: &[f64],
    f: usize,
) -> Result<[f64; 3], DegenerateTriangle> {
    let face = t.faces()[f];
    let fe = t.face_edges(f);
    let mut sides = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        sides[i] = edge_length(radii[face[j]], radii[face[k]], w.overlap(fe[i]));
    }
    triangle_angles(sides[0], sides[1], sides[2]).map_err(|e| e.in_face(f))
}

/// Sum of the corner angles at each vertex, accumulated in face order.
pub fn angle_sums(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
) -> Result<Vec<f64>, DegenerateTriangle> {
    let radii: Vec<f64> = log_radii.iter().map(|u| u.exp()).collect();
    let mut sigma = vec![0.0; t.vertex_count()];
    for (f, face) in t.faces().iter().enumerate() {
        let angles = face_angles(t, w, &radii, f)?;
        for i in 0..3 {
            sigma[face[i]] += angles[i];
        }
    }
    Ok(sigma)
}

/// `K_v = σ_v − 2π` inside and `σ_v − θ_v` on the boundary.
pub fn curvatures(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
) -> Result<Vec<f64>, DegenerateTriangle> {
    let mut k = angle_sums(t, w, log_radii)?;
    for (v, kv) in k.iter_mut().enumerate() {
        *kv -= w.target_angle(v);
    }
    Ok(k)
}

/// Evaluates curvature and energy for `state.log_radii` and stores them.
pub fn curvature(
    t: &Triangulation,
    w: &PatternWeights,
    state: &mut RadiusState,
) -> Result<(), DegenerateTriangle> {
    let k = curvatures(t, w, &state.log_radii)?;
    state.energy = k.iter().map(|x| x * x).sum();
    state.curvatures = k;
    Ok(())
}

/// Sparse symmetric matrix of `∂K_u/∂log r_v`: one coefficient per edge and
/// a diagonal equal to the negated row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMatrix {
    edges: Vec<(usize, usize)>,
    off_diagonal: Vec<f64>,
    diagonal: Vec<f64>,
}

impl StiffnessMatrix {
    /// Builds the matrix from per-edge coefficients; the diagonal is derived.
    pub fn from_edge_coefficients(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        off_diagonal: Vec<f64>,
    ) -> Self {
        assert_eq!(edges.len(), off_diagonal.len());
        let mut diagonal = vec![0.0; vertex_count];
        for (&(u, v), &c) in edges.iter().zip(&off_diagonal) {
            diagonal[u] -= c;
            diagonal[v] -= c;
        }
        Self {
            edges,
            off_diagonal,
            diagonal,
        }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Coefficient of edge `e`.
    pub fn coefficient(&self, e: usize) -> f64 {
        self.off_diagonal[e]
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = J x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (d, xi)) in out.iter_mut().zip(self.diagonal.iter().zip(x)) {
            *o = d * xi;
        }
        for (&(u, v), &c) in self.edges.iter().zip(&self.off_diagonal) {
            out[u] += c * x[v];
            out[v] += c * x[u];
        }
    }
}

/// Curvature Jacobian in log-radius coordinates.
///
/// For an edge `uv` in face `uvw` the face contributes
/// `r_u r_v [sin²Θ_uv r_u r_v + (I_u r_u + I_v r_v) r_w] / (2 l_uv² A_uvw)`
/// where `A_uvw` is the area of the face.
pub fn stiffness(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
) -> Result<StiffnessMatrix, DegenerateTriangle> {
    let radii: Vec<f64> = log_radii.iter().map(|u| u.exp()).collect();
    let mut coeff = vec![0.0; t.edges().len()];
    for (f, face) in t.faces().iter().enumerate() {
        let fe = t.face_edges(f);
        let theta = fe.map(|e| w.overlap(e));
        let cos = theta.map(f64::cos);
        let sides = {
            let mut s = [0.0; 3];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                s[i] = edge_length(radii[face[j]], radii[face[k]], theta[i]);
            }
            s
        };
        let area = triangle_area(sides[0], sides[1], sides[2]).map_err(|e| e.in_face(f))?;
        // I at corner i: opposite edge i, adjacent edges j and k
        let inter: [f64; 3] = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            cos[i] + cos[j] * cos[k]
        });
        // edge k joins corners i and j, third corner k
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let (ru, rv, rw) = (radii[face[i]], radii[face[j]], radii[face[k]]);
            let sin2 = theta[k].sin().powi(2);
            let num = ru * rv * (sin2 * ru * rv + (inter[i] * ru + inter[j] * rv) * rw);
            coeff[fe[k]] += num / (2.0 * sides[k] * sides[k] * area);
        }
    }
    Ok(StiffnessMatrix::from_edge_coefficients(
        t.vertex_count(),
        t.edges().to_vec(),
        coeff,
    ))
}

/// `Σ_v σ_v` must equal `π·|F|` for any radii.
pub fn total_angle(t: &Triangulation) -> f64 {
    PI * t.faces().len() as f64
}
