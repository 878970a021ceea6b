use num_complex::Complex;

use super::field::SpectralField;
use super::lattice::Lattice;
use crate::error::{domain, Error, Result};
use crate::Scalar;

/// Values of a field at the points `x_j = 2π j / m` of a uniform grid,
/// row-major with the first axis slowest.
#[derive(Clone, Debug)]
pub struct PhysicalGrid<T> {
    d: usize,
    m: usize,
    values: Vec<Complex<T>>,
}

/// Smallest power of two that is at least `min_points`.
pub fn grid_size(min_points: usize) -> usize {
    min_points.max(1).next_power_of_two()
}

/// In-place d-dimensional FFT. The forward transform computes
/// `Σ_x u(x) e^{-i n x}`, the inverse `Σ_n c(n) e^{i n x}`; neither is
/// normalized.
pub fn fft_nd<T: Scalar>(data: &mut [Complex<T>], d: usize, m: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m.pow(d as u32));
    let fft = T::plan(m, inverse);
    if d == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![Complex::new(T::zero(), T::zero()); m];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

impl<T: Scalar> PhysicalGrid<T> {
    pub fn from_field(f: &SpectralField<T>, m: usize) -> Result<Self> {
        let lat = f.lattice();
        if m < lat.side() {
            return Err(domain(format!(
                "grid of {m} points cannot resolve cutoff {}",
                lat.cutoff()
            )));
        }
        let d = lat.dim();
        let mut values = vec![Complex::new(T::zero(), T::zero()); m.pow(d as u32)];
        let mut buf = vec![0i64; d];
        for (i, c) in f.coeffs().iter().enumerate() {
            lat.write_freq(i, &mut buf);
            values[wrap_index(&buf, m)] = *c;
        }
        fft_nd(&mut values, d, m, true);
        Ok(PhysicalGrid { d, m, values })
    }

    pub fn from_values(d: usize, m: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != m.pow(d as u32) {
            return Err(Error::Dimension(format!(
                "{} values for a {m}^{d} grid",
                values.len()
            )));
        }
        Ok(PhysicalGrid { d, m, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_dim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    /// Mean of `|u|^2` over the grid, i.e. `(2π)^{-d} ∫ |u|^2` for resolved
    /// trigonometric polynomials.
    pub fn mean_square(&self) -> T {
        let s: T = self.values.iter().map(|v| v.norm_sqr()).sum();
        s / T::of(self.values.len() as f64)
    }

    /// Forward transform, keeping the box of the given cutoff. Real output is
    /// symmetrized so that conjugate symmetry holds exactly.
    pub fn to_field(&self, cutoff: usize, real: bool) -> Result<SpectralField<T>> {
        if 2 * cutoff + 1 > self.m {
            return Err(domain(format!(
                "cutoff {cutoff} exceeds what a {}-point grid resolves",
                self.m
            )));
        }
        let mut data = self.values.clone();
        fft_nd(&mut data, self.d, self.m, false);
        let norm = T::one() / T::of(data.len() as f64);
        let lat = Lattice::new(self.d, cutoff)?;
        let mut buf = vec![0i64; self.d];
        let coeffs = (0..lat.len())
            .map(|i| {
                lat.write_freq(i, &mut buf);
                data[wrap_index(&buf, self.m)] * norm
            })
            .collect();
        let mut f = SpectralField::from_raw(lat, coeffs, false);
        if real {
            f.enforce_reality();
        }
        Ok(f)
    }
}

fn wrap_index(n: &[i64], m: usize) -> usize {
    let mi = m as i64;
    n.iter().fold(0usize, |acc, &c| acc * m + c.rem_euclid(mi) as usize)
}

/// Exact spectral coefficients of the pointwise product of `fs`.
///
/// The result lives on the box whose cutoff is the sum of the factors'
/// cutoffs, so nothing is truncated; callers re-truncate with
/// [`SpectralField::resize`]. The physical grid has the smallest power of two
/// at least `Σ (2 N_j + 1)` points per dimension, which is alias-free.
pub fn pointwise_product<T: Scalar>(fs: &[&SpectralField<T>]) -> Result<SpectralField<T>> {
    let first = fs
        .first()
        .ok_or_else(|| domain("product of an empty list of fields"))?;
    let d = first.lattice().dim();
    if let Some(bad) = fs.iter().find(|f| f.lattice().dim() != d) {
        return Err(Error::Dimension(format!(
            "factor of dimension {} in a product of dimension {d}",
            bad.lattice().dim()
        )));
    }
    if fs.len() == 1 {
        return Ok((*first).clone());
    }
    let cutoff: usize = fs.iter().map(|f| f.lattice().cutoff()).sum();
    let min_points: usize = fs.iter().map(|f| f.lattice().side()).sum();
    let m = grid_size(min_points);
    let real = fs.iter().all(|f| f.is_real());
    let mut acc = PhysicalGrid::from_field(first, m)?;
    for f in &fs[1..] {
        let g = PhysicalGrid::from_field(f, m)?;
        for (a, b) in acc.values.iter_mut().zip(&g.values) {
            *a = *a * *b;
        }
    }
    acc.to_field(cutoff, real)
}
