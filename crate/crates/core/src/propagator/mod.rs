//! The dispersion-generalized wave propagator: per-mode kernels, quadrature
//! rules and Duhamel integrals.

mod duhamel;
mod kernel;
mod quadrature;

pub use duhamel::{duhamel, duhamel_trapezoid_grid, duhamel_with};
pub use kernel::{cos_kernel, g_covariance, wave_kernel};
pub use quadrature::{default_nodes, gauss_legendre, QuadratureKind, QuadratureRule};
