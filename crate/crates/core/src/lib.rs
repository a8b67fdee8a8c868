//! Level-set reconstruction of curves and surfaces from point clouds.
//!
//! The pipeline: an unsigned distance field to the cloud ([`distance`]),
//! a PCA direction field ([`normals`]), a box-shaped initial level set
//! ([`levelset`]), and an operator-splitting iteration ([`solver`]) whose
//! linear subproblems are solved exactly in Fourier space ([`spectral`]).

pub mod config;
pub mod contour;
pub mod distance;
pub mod error;
pub mod grid;
pub mod levelset;
pub mod metrics;
pub mod normals;
pub mod pointcloud;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, Scheme, VectorField};
pub use pointcloud::PointCloud;
