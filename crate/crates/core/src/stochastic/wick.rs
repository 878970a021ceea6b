use num_complex::Complex;

use super::hermite::hermite;
use crate::error::{domain, Result};
use crate::spectral::{grid_size, SpectralField};
use crate::Scalar;

/// Wick power `ℓ` with variance parameter `σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickSpec<T> {
    pub ell: usize,
    pub sigma: T,
}

impl<T: Scalar> WickSpec<T> {
    pub fn new(ell: usize, sigma: T) -> Result<Self> {
        if ell == 0 {
            return Err(domain("Wick power must be at least 1"));
        }
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(domain(format!("variance parameter {sigma} must be finite and nonnegative")));
        }
        Ok(WickSpec { ell, sigma })
    }
}

/// `:Z^ℓ: = H_ℓ(Z(x); σ)` evaluated on an alias-free physical grid.
///
/// The result is returned on the box of cutoff `ℓ N`; resize it to truncate.
pub fn wick_power<T: Scalar>(z: &SpectralField<T>, spec: WickSpec<T>) -> Result<SpectralField<T>> {
    if !z.is_real() {
        return Err(domain("Wick powers need a real field"));
    }
    let spec = WickSpec::new(spec.ell, spec.sigma)?;
    if spec.ell == 1 {
        return Ok(z.clone());
    }
    let lat = z.lattice();
    let m = grid_size(spec.ell * lat.side());
    let mut grid = z.to_physical(m)?;
    for v in grid.values_mut() {
        *v = Complex::new(hermite(spec.ell, v.re, spec.sigma), T::zero());
    }
    grid.to_field(spec.ell * lat.cutoff(), true)
}
