//! Frequency lattices, spectral fields, dealiased products and the `WLF1`
//! snapshot format.

mod field;
mod grid;
mod io;
mod lattice;

pub use field::{SpacetimeField, SpectralField};
pub use grid::{fft_nd, grid_size, pointwise_product, PhysicalGrid};
pub use io::{deserialize_field, read_field, serialize_field, write_field, FORMAT_VERSION, MAGIC};
pub use lattice::{bracket, bracket_in, FreqVec, Lattice};
