//! Numerical building blocks shared by the geometry and solver modules.

pub mod fd;
pub mod fit;
pub mod grid;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod special;
