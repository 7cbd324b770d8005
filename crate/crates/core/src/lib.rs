//! Numerical toolkit for the positive mass theorem on asymptotically hyperbolic manifolds
//! with corners.
//!
//! The pipeline glues two rotationally symmetric metrics along a sphere, smooths the corner,
//! solves the perturbed eigenfunction equation −Δv + nv + fv = w, deforms the metric
//! conformally by (1+v)^{4/(n−2)} and tracks the mass aspect through the deformation.

pub mod error;
pub mod numerics;

pub mod hyperboloid_core;
pub mod green_kernel;
pub mod warped_geometry;
pub mod corner_smoothing;
pub mod radial_solver;
pub mod mass_aspect;
pub mod representation;
pub mod cli_pipeline;

pub use error::{Error, Result};
