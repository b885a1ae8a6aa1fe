//! Problem files.
//!
//! ```json
//! {
//!   "vertex_count": 4,
//!   "faces": [[0, 1, 2], [0, 2, 3]],
//!   "overlap": [{"u": 0, "v": 2, "theta": "pi/3"}],
//!   "boundary_angles": [{"v": 0, "theta": "pi/2"}, ...],
//!   "initial_radii": [1, 1, 1, 1]
//! }
//! ```
//!
//! Edges without an `overlap` entry are tangent; boundary vertices without
//! an angle entry are straight (`π`).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::angle::deserialize_angle;
use crate::mesh::{validate_weights, MeshError, PatternWeights, Triangulation, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapEntry {
    pub u: usize,
    pub v: usize,
    #[serde(deserialize_with = "deserialize_angle")]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleEntry {
    pub v: usize,
    #[serde(deserialize_with = "deserialize_angle")]
    pub theta: f64,
}

/// Serialized form of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub vertex_count: usize,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlap: Vec<OverlapEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_angles: Vec<AngleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_radii: Option<Vec<f64>>,
}

/// Something wrong with the content of a syntactically valid file.
#[derive(Debug, Clone, PartialEq)]
pub enum InputViolation {
    UnknownEdge { u: usize, v: usize },
    DuplicateOverlap { u: usize, v: usize },
    NotBoundary { v: usize },
    DuplicateBoundaryAngle { v: usize },
    InitialRadiiLength { expected: usize, got: usize },
    NonPositiveRadius { v: usize, r: f64 },
    Weights(Violation),
}

impl fmt::Display for InputViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputViolation::UnknownEdge { u, v } => {
                write!(f, "overlap entry ({u}, {v}) is not an edge")
            }
            InputViolation::DuplicateOverlap { u, v } => {
                write!(f, "edge ({u}, {v}) has more than one overlap entry")
            }
            InputViolation::NotBoundary { v } => {
                write!(f, "boundary angle given for vertex {v}, which is not on the boundary")
            }
            InputViolation::DuplicateBoundaryAngle { v } => {
                write!(f, "vertex {v} has more than one boundary angle entry")
            }
            InputViolation::InitialRadiiLength { expected, got } => {
                write!(f, "initial_radii has {got} entries, expected {expected}")
            }
            InputViolation::NonPositiveRadius { v, r } => {
                write!(f, "initial radius {r} of vertex {v} is not positive")
            }
            InputViolation::Weights(v) => v.fmt(f),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid triangulation: {0}")]
    Mesh(#[from] MeshError),
    #[error("invalid problem:\n{}", list(.0))]
    Validation(Vec<InputViolation>),
}

fn list(vs: &[InputViolation]) -> String {
    vs.iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub triangulation: Triangulation,
    pub weights: PatternWeights,
    pub initial_radii: Option<Vec<f64>>,
}

impl Problem {
    /// Validates a triangulation and weights, collecting every violation.
    pub fn new(
        triangulation: Triangulation,
        weights: PatternWeights,
        initial_radii: Option<Vec<f64>>,
    ) -> Result<Self, ProblemError> {
        let mut violations: Vec<InputViolation> = Vec::new();
        check_radii(&triangulation, initial_radii.as_deref(), &mut violations);
        violations.extend(
            validate_weights(&triangulation, &weights)
                .violations
                .into_iter()
                .map(InputViolation::Weights),
        );
        if violations.is_empty() {
            Ok(Self {
                triangulation,
                weights,
                initial_radii,
            })
        } else {
            Err(ProblemError::Validation(violations))
        }
    }

    /// Builds a problem from its serialized form.
    pub fn from_file(file: ProblemFile) -> Result<Self, ProblemError> {
        let t = Triangulation::new(file.faces, file.vertex_count)?;
        let mut w = PatternWeights::new(&t);
        let mut violations = Vec::new();

        let mut seen = BTreeSet::new();
        for entry in &file.overlap {
            let (u, v) = (entry.u, entry.v);
            match t.edge_id(u, v) {
                None => violations.push(InputViolation::UnknownEdge { u, v }),
                Some(e) if !seen.insert(e) => {
                    violations.push(InputViolation::DuplicateOverlap { u, v })
                }
                Some(_) => {
                    w.set_overlap(&t, u, v, entry.theta)
                        .expect("edge id was just resolved");
                }
            }
        }
        let mut seen = BTreeSet::new();
        for entry in &file.boundary_angles {
            let v = entry.v;
            if v >= t.vertex_count() || !t.is_boundary(v) {
                violations.push(InputViolation::NotBoundary { v });
            } else if !seen.insert(v) {
                violations.push(InputViolation::DuplicateBoundaryAngle { v });
            } else {
                w.set_boundary_angle(v, entry.theta)
                    .expect("boundary membership was just checked");
            }
        }

        match Self::new(t, w, file.initial_radii) {
            Ok(p) if violations.is_empty() => Ok(p),
            Ok(_) => Err(ProblemError::Validation(violations)),
            Err(ProblemError::Validation(more)) => {
                violations.extend(more);
                Err(ProblemError::Validation(violations))
            }
            Err(e) => Err(e),
        }
    }

    /// Serialized form listing every edge overlap and every boundary angle.
    pub fn to_file(&self) -> ProblemFile {
        let t = &self.triangulation;
        ProblemFile {
            vertex_count: t.vertex_count(),
            faces: t.faces().to_vec(),
            overlap: t
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| OverlapEntry {
                    u,
                    v,
                    theta: self.weights.overlap(e),
                })
                .collect(),
            boundary_angles: t
                .boundary_cycle()
                .iter()
                .map(|&v| AngleEntry {
                    v,
                    theta: self.weights.boundary_angle(v).expect("boundary vertex"),
                })
                .collect(),
            initial_radii: self.initial_radii.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }
}

fn check_radii(t: &Triangulation, radii: Option<&[f64]>, out: &mut Vec<InputViolation>) {
    let Some(radii) = radii else { return };
    if radii.len() != t.vertex_count() {
        out.push(InputViolation::InitialRadiiLength {
            expected: t.vertex_count(),
            got: radii.len(),
        });
    }
    for (v, &r) in radii.iter().enumerate() {
        if !(r > 0.0 && r.is_finite()) {
            out.push(InputViolation::NonPositiveRadius { v, r });
        }
    }
}

/// Parses and validates problem JSON.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let file: ProblemFile = serde_json::from_str(text)?;
    Problem::from_file(file)
}
