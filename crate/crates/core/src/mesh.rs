//! Triangulated disks, pattern weights and their validation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::geometry::intersection_coefficient;

/// Tolerance on the boundary angle sum `Σθ_v = (|V_∂| − 2)π`.
pub const ANGLE_SUM_TOLERANCE: f64 = 1e-9;

/// Slack allowed below zero when checking the intersection coefficients of a face.
pub const INTERSECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeshError {
    #[error("triangulation has no faces")]
    Empty,
    #[error("vertex_count must be positive")]
    NoVertices,
    #[error("face {face} references vertex {vertex} but vertex_count is {vertex_count}")]
    IndexOutOfRange {
        face: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex: {vertices:?}")]
    RepeatedVertex { face: usize, vertices: [usize; 3] },
    #[error("edge ({u}, {v}) belongs to more than two faces")]
    NonManifoldEdge { u: usize, v: usize },
    #[error("edge ({u}, {v}) has the same direction in two faces")]
    InconsistentOrientation { u: usize, v: usize },
    #[error("boundary is not a simple cycle: vertex {vertex} is visited more than once")]
    NonSimpleBoundary { vertex: usize },
    #[error("boundary has {components} components, expected exactly one")]
    MultipleBoundaryComponents { components: usize },
    #[error("not a disk: V - E + F = {euler}, expected 1")]
    NotADisk { euler: i64 },
    #[error("generations must be at least 1")]
    ZeroGenerations,
}

/// Error raised when setting a weight on something that does not carry one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("({u}, {v}) is not an edge of the triangulation")]
    UnknownEdge { u: usize, v: usize },
    #[error("vertex {v} is not a boundary vertex")]
    NotBoundary { v: usize },
}

/// A triangulated topological disk with counterclockwise faces.
///
/// Edges are stored once per unordered pair as `(min, max)` and indexed in
/// first-seen order over the face list. The boundary cycle starts at the
/// smallest boundary vertex and runs counterclockwise (interior on the left).
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    /// `face_edges[f][i]` is the edge opposite `faces[f][i]`.
    face_edges: Vec<[usize; 3]>,
    edge_faces: Vec<Vec<usize>>,
    /// Sorted `(neighbor, edge)` pairs per vertex.
    neighbors: Vec<Vec<(usize, usize)>>,
    boundary_cycle: Vec<usize>,
    is_boundary: Vec<bool>,
    interior_vertices: Vec<usize>,
}

impl Triangulation {
    pub fn new(faces: Vec<[usize; 3]>, vertex_count: usize) -> Result<Self, MeshError> {
        if vertex_count == 0 {
            return Err(MeshError::NoVertices);
        }
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (f, face) in faces.iter().enumerate() {
            if let Some(&vertex) = face.iter().find(|&&v| v >= vertex_count) {
                return Err(MeshError::IndexOutOfRange {
                    face: f,
                    vertex,
                    vertex_count,
                });
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(MeshError::RepeatedVertex {
                    face: f,
                    vertices: *face,
                });
            }
        }

        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        let mut edge_faces: Vec<Vec<usize>> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        // directed half-edge -> face
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();

        for (f, face) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for i in 0..3 {
                let a = face[(i + 1) % 3];
                let b = face[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_faces.push(Vec::new());
                    edges.len() - 1
                });
                edge_faces[e].push(f);
                if edge_faces[e].len() > 2 {
                    return Err(MeshError::NonManifoldEdge { u: key.0, v: key.1 });
                }
                if directed.insert((a, b), f).is_some() {
                    return Err(MeshError::InconsistentOrientation { u: a, v: b });
                }
                fe[i] = e;
            }
            face_edges.push(fe);
        }

        let mut neighbors = vec![Vec::new(); vertex_count];
        for (e, &(u, v)) in edges.iter().enumerate() {
            neighbors[u].push((v, e));
            neighbors[v].push((u, e));
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        // Boundary half-edges keep the direction they have in their only face.
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut boundary_edge_count = 0;
        for (e, fs) in edge_faces.iter().enumerate() {
            if fs.len() != 1 {
                continue;
            }
            boundary_edge_count += 1;
            let (u, v) = edges[e];
            let (a, b) = if directed.contains_key(&(u, v)) {
                (u, v)
            } else {
                (v, u)
            };
            if next.insert(a, b).is_some() {
                return Err(MeshError::NonSimpleBoundary { vertex: a });
            }
        }

        let euler = vertex_count as i64 - edges.len() as i64 + faces.len() as i64;

        let boundary_cycle = match next.keys().min() {
            None => return Err(MeshError::NotADisk { euler }),
            Some(&start) => {
                let mut cycle = vec![start];
                let mut cur = next[&start];
                while cur != start {
                    cycle.push(cur);
                    cur = next[&cur];
                }
                cycle
            }
        };
        if boundary_cycle.len() != boundary_edge_count {
            let components = count_cycles(&next);
            return Err(MeshError::MultipleBoundaryComponents { components });
        }
        if euler != 1 {
            return Err(MeshError::NotADisk { euler });
        }

        let mut is_boundary = vec![false; vertex_count];
        for &v in &boundary_cycle {
            is_boundary[v] = true;
        }
        let interior_vertices = (0..vertex_count).filter(|&v| !is_boundary[v]).collect();

        Ok(Self {
            vertex_count,
            faces,
            edges,
            edge_index,
            face_edges,
            edge_faces,
            neighbors,
            boundary_cycle,
            is_boundary,
            interior_vertices,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Unordered edges as `(min, max)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Edge indices of face `f`, the `i`-th opposite the `i`-th vertex.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e].len() == 1
    }

    /// `(neighbor, edge index)` pairs sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.neighbors[v]
    }

    pub fn boundary_cycle(&self) -> &[usize] {
        &self.boundary_cycle
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }
}

fn count_cycles(next: &HashMap<usize, usize>) -> usize {
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut components = 0;
    for s in starts {
        if seen.contains(&s) {
            continue;
        }
        components += 1;
        let mut cur = s;
        while seen.insert(cur) {
            cur = next[&cur];
        }
    }
    components
}

/// Overlap angles per edge and prescribed corner angles per boundary vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternWeights {
    /// Θ in radians, indexed by edge id.
    overlap: Vec<f64>,
    /// θ in radians for boundary vertices, `None` elsewhere.
    boundary_angle: Vec<Option<f64>>,
}

impl PatternWeights {
    /// Tangency on every edge and a straight angle at every boundary vertex.
    pub fn new(t: &Triangulation) -> Self {
        let mut boundary_angle = vec![None; t.vertex_count()];
        for &v in t.boundary_cycle() {
            boundary_angle[v] = Some(PI);
        }
        Self {
            overlap: vec![0.0; t.edges().len()],
            boundary_angle,
        }
    }

    pub fn set_overlap(
        &mut self,
        t: &Triangulation,
        u: usize,
        v: usize,
        theta: f64,
    ) -> Result<(), WeightError> {
        let e = t.edge_id(u, v).ok_or(WeightError::UnknownEdge { u, v })?;
        self.overlap[e] = theta;
        Ok(())
    }

    pub fn set_boundary_angle(&mut self, v: usize, theta: f64) -> Result<(), WeightError> {
        match self.boundary_angle.get_mut(v) {
            Some(slot @ Some(_)) => {
                *slot = Some(theta);
                Ok(())
            }
            _ => Err(WeightError::NotBoundary { v }),
        }
    }

    pub fn overlap(&self, e: usize) -> f64 {
        self.overlap[e]
    }

    pub fn overlaps(&self) -> &[f64] {
        &self.overlap
    }

    pub fn boundary_angle(&self, v: usize) -> Option<f64> {
        self.boundary_angle[v]
    }

    /// Target angle sum at `v`: 2π inside, θ_v on the boundary.
    pub fn target_angle(&self, v: usize) -> f64 {
        self.boundary_angle[v].unwrap_or(2.0 * PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    OverlapOutOfRange { u: usize, v: usize, theta: f64 },
    BoundaryAngleOutOfRange { v: usize, theta: f64 },
    /// `I_vertex` of `face` is negative.
    NegativeIntersection { face: usize, vertex: usize, value: f64 },
    AngleSumMismatch { sum: f64, expected: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverlapOutOfRange { u, v, theta } => {
                write!(f, "overlap angle {theta} on edge ({u}, {v}) is outside [0, pi)")
            }
            Violation::BoundaryAngleOutOfRange { v, theta } => {
                write!(f, "boundary angle {theta} at vertex {v} is outside (0, pi]")
            }
            Violation::NegativeIntersection {
                face,
                vertex,
                value,
            } => write!(
                f,
                "face {face}: intersection coefficient at vertex {vertex} is {value} < 0"
            ),
            Violation::AngleSumMismatch { sum, expected } => write!(
                f,
                "boundary angles sum to {sum}, expected (|boundary| - 2) * pi = {expected}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks angle ranges, face constructibility (`I ≥ 0` at every corner) and
/// the flat angle-sum condition. Collects every violation.
pub fn validate_weights(t: &Triangulation, w: &PatternWeights) -> ValidationReport {
    let mut violations = Vec::new();

    for (e, &(u, v)) in t.edges().iter().enumerate() {
        let theta = w.overlap(e);
        if !(0.0..PI).contains(&theta) {
            violations.push(Violation::OverlapOutOfRange { u, v, theta });
        }
    }

    let mut sum = 0.0;
    for &v in t.boundary_cycle() {
        let theta = w.boundary_angle(v).unwrap_or(f64::NAN);
        if !(theta > 0.0 && theta <= PI) {
            violations.push(Violation::BoundaryAngleOutOfRange { v, theta });
        }
        sum += theta;
    }

    for (f, face) in t.faces().iter().enumerate() {
        let fe = t.face_edges(f);
        let theta = fe.map(|e| w.overlap(e));
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            // opposite edge first, then the two edges at the vertex
            let value = intersection_coefficient(theta[i], theta[k], theta[j]);
            if value < -INTERSECTION_TOLERANCE || value.is_nan() {
                violations.push(Violation::NegativeIntersection {
                    face: f,
                    vertex: face[i],
                    value,
                });
            }
        }
    }

    let expected = (t.boundary_cycle().len() as f64 - 2.0) * PI;
    if !((sum - expected).abs() <= ANGLE_SUM_TOLERANCE) {
        violations.push(Violation::AngleSumMismatch { sum, expected });
    }

    ValidationReport { violations }
}

/// Triangular-lattice disk with `generations` hexagonal rings around vertex 0.
///
/// Overlaps are all zero; the six corners get `2π/3` and the rest of the
/// boundary gets `π`. Ring `k` occupies indices `3k(k-1)+1 ..= 3k(k+1)` and
/// starts at a corner.
pub fn generate_hex_disk(
    generations: usize,
) -> Result<(Triangulation, PatternWeights), MeshError> {
    if generations == 0 {
        return Err(MeshError::ZeroGenerations);
    }
    let n = generations as i64;
    // axial directions, counterclockwise
    const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut coords = vec![(0, 0)];
    index.insert((0, 0), 0);
    for k in 1..=n {
        // start at the corner (k, -k) and walk the ring
        let mut cur = (k * DIRS[5].0, k * DIRS[5].1);
        for dir in DIRS.iter().skip(1).chain(DIRS.iter().take(1)) {
            for _ in 0..k {
                index.insert(cur, coords.len());
                coords.push(cur);
                cur = (cur.0 + dir.0, cur.1 + dir.1);
            }
        }
    }

    let inside = |(q, r): (i64, i64)| q.abs() <= n && r.abs() <= n && (q + r).abs() <= n;
    let mut faces = Vec::new();
    for &(q, r) in &coords {
        let a = (q, r);
        let up = [a, (q + 1, r), (q, r + 1)];
        let down = [a, (q + 1, r - 1), (q + 1, r)];
        for tri in [up, down] {
            if tri.iter().all(|&p| inside(p)) {
                faces.push(tri.map(|p| index[&p]));
            }
        }
    }

    let t = Triangulation::new(faces, coords.len())?;
    let mut w = PatternWeights::new(&t);
    for &v in t.boundary_cycle() {
        let (q, r) = coords[v];
        let s = -q - r;
        if q == 0 || r == 0 || s == 0 {
            w.set_boundary_angle(v, 2.0 * PI / 3.0)
                .expect("ring vertex is on the boundary");
        }
    }
    Ok((t, w))
}
