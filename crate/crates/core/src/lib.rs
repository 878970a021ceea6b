//! Numerical laboratory for Wick-renormalized random wave fields on the
//! torus `T^d`.
//!
//! The crate builds the Gaussian random linear solution of the
//! dispersion-generalized wave equation, its Wick powers and Duhamel
//! images, checks their second moments against exact Wiener-chaos oracles,
//! fits decay exponents, verifies lattice convolution bounds, and solves the
//! renormalized remainder equation by Picard iteration.
//!
//! The spectral, stochastic and propagator layers are generic over the
//! floating-point [`Scalar`]; the experiment layers (`moments`, `counting`,
//! `solver`) run in `f64`. Concrete aliases for the common instantiations are
//! exported at the crate root.

pub mod chaos;
pub mod counting;
mod error;
pub mod moments;
pub mod propagator;
mod scalar;
pub mod solver;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex;

/// Double-precision spectral field.
pub type SpectralField64 = spectral::SpectralField<f64>;
/// Single-precision spectral field.
pub type SpectralField32 = spectral::SpectralField<f32>;
/// Double-precision time-sampled field.
pub type SpacetimeField64 = spectral::SpacetimeField<f64>;
/// Double-precision Gaussian data draw.
pub type GaussianDraw64 = stochastic::GaussianDraw<f64>;
/// Double-precision quadrature rule.
pub type QuadratureRule64 = propagator::QuadratureRule<f64>;
/// Complex double.
pub type C64 = Complex<f64>;

/// Tool version, written next to every run output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
