//! Relative pose estimation for single cameras and multi-camera rigs from
//! affine correspondences (ACs) and point correspondences (PCs).
//!
//! Rotations are parameterized by the Cayley vector `q`, which turns the
//! epipolar and affine constraints into polynomial systems in `qx, qy, qz`.
//! The systems are solved by precomputed elimination templates and an action
//! matrix eigendecomposition.

pub mod constraints;
pub mod dataset;
pub mod finite_field;
pub mod geometry;
pub mod pipeline;
pub mod polynomial;
pub mod solver;
