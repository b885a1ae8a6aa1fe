//! Planar circle patterns on triangulated disks.
//!
//! Given a triangulation, an overlap angle per edge and a corner angle per
//! boundary vertex, [`radius::solve_radii`] finds radii whose glued triangles
//! are flat with the prescribed corners, and [`center::layout`] places the
//! circle centers. [`pipeline::solve`] runs both stages.

pub mod center;
pub mod cg;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod pipeline;
pub mod radius;

pub use center::{layout, CenterOptions, Layout, Point};
pub use geometry::{RadiusState, StiffnessMatrix};
pub use mesh::{generate_hex_disk, validate_weights, PatternWeights, Triangulation};
pub use radius::{solve_radii, RadiusMode, RadiusSolveConfig, RadiusSolveReport};
