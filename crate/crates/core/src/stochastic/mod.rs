//! Seeded Gaussian data, the random linear solution, Hermite polynomials and
//! Wick powers.

mod draw;
mod hermite;
pub mod rng;
mod wick;

pub use draw::{data_from_draw, linear_solution, sample_data, sigma_n, GaussianDraw, LinearSolution};
pub use hermite::{hermite, hermite_all};
pub use wick::{wick_power, WickSpec};
