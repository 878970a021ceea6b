use std::ops::{Add, Sub};

use num_complex::Complex;

use super::grid::PhysicalGrid;
use super::lattice::Lattice;
use crate::error::{domain, Error, Result};
use crate::Scalar;

/// Fourier coefficients of a function on `T^d`, dense over a frequency box.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    lattice: Lattice,
    coeffs: Vec<Complex<T>>,
    real: bool,
}

impl<T: Scalar> SpectralField<T> {
    /// Builds a field from coefficients in lattice order.
    ///
    /// A real field must already satisfy `c(-n) = conj c(n)` bitwise.
    pub fn new(lattice: Lattice, coeffs: Vec<Complex<T>>, real: bool) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a lattice of {} points",
                coeffs.len(),
                lattice.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(domain("non-finite coefficient"));
        }
        if real {
            for i in 0..lattice.len() {
                let j = lattice.neg_index(i);
                if coeffs[j] != coeffs[i].conj() {
                    return Err(domain(format!(
                        "coefficient at {} breaks conjugate symmetry",
                        lattice.freq(i)
                    )));
                }
            }
        }
        Ok(SpectralField { lattice, coeffs, real })
    }

    pub fn zeros(lattice: Lattice, real: bool) -> Self {
        SpectralField {
            lattice,
            coeffs: vec![Complex::new(T::zero(), T::zero()); lattice.len()],
            real,
        }
    }

    /// The constant function `c`.
    pub fn constant(lattice: Lattice, c: T) -> Self {
        let mut f = Self::zeros(lattice, true);
        f.coeffs[lattice.center()] = Complex::new(c, T::zero());
        f
    }

    /// Fills coefficients from a function of the frequency. For real fields
    /// only the zero mode and the half-lattice are evaluated; the rest is
    /// mirrored, and the zero mode keeps only its real part.
    pub fn from_fn(lattice: Lattice, real: bool, mut f: impl FnMut(&[i64]) -> Complex<T>) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); lattice.len()];
        let mut buf = vec![0i64; lattice.dim()];
        let center = lattice.center();
        for i in 0..lattice.len() {
            if real && i < center {
                continue;
            }
            lattice.write_freq(i, &mut buf);
            let mut c = f(&buf);
            if real && i == center {
                c.im = T::zero();
            }
            coeffs[i] = c;
            if real && i > center {
                coeffs[lattice.neg_index(i)] = c.conj();
            }
        }
        SpectralField { lattice, coeffs, real }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient at `n`, zero outside the box.
    pub fn get(&self, n: &[i64]) -> Complex<T> {
        self.lattice
            .index(n)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Replaces the coefficient at `index` (and its mirror for real fields).
    pub fn set(&mut self, index: usize, c: Complex<T>) {
        if self.real {
            let j = self.lattice.neg_index(index);
            if j == index {
                self.coeffs[index] = Complex::new(c.re, T::zero());
            } else {
                self.coeffs[index] = c;
                self.coeffs[j] = c.conj();
            }
        } else {
            self.coeffs[index] = c;
        }
    }

    /// Restricts or zero-pads to a box of the given cutoff.
    pub fn resize(&self, cutoff: usize) -> Self {
        let target = self.lattice.with_cutoff(cutoff);
        let mut out = Self::zeros(target, self.real);
        let map = self.lattice.reindex_into(&target);
        for (i, slot) in map.into_iter().enumerate() {
            if let Some(j) = slot {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        out
    }

    /// Zeroes every coefficient with `|n_i| > cutoff` for some `i`, keeping the
    /// lattice.
    pub fn project(&mut self, cutoff: usize) {
        let mut buf = vec![0i64; self.lattice.dim()];
        for i in 0..self.lattice.len() {
            self.lattice.write_freq(i, &mut buf);
            if buf.iter().any(|c| c.unsigned_abs() as usize > cutoff) {
                self.coeffs[i] = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Replaces `c(n)` by the average of `c(n)` and `conj c(-n)`, making the
    /// conjugate symmetry exact, and marks the field real.
    pub fn enforce_reality(&mut self) {
        let half = T::of(0.5);
        let center = self.lattice.center();
        for i in center..self.lattice.len() {
            let j = self.lattice.neg_index(i);
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * half;
            if i == j {
                self.coeffs[i] = Complex::new(avg.re, T::zero());
            } else {
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
        self.real = true;
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = *c * s);
        out
    }

    /// `self += s * other` on a shared lattice.
    pub fn add_scaled(&mut self, s: T, other: &SpectralField<T>) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + *b * s;
        }
        self.real = self.real && other.real;
        Ok(())
    }

    /// Discrete Sobolev norm `(Σ ⟨n⟩^{2s} |c(n)|^2)^{1/2}` over the box.
    pub fn sobolev_norm(&self, s: T) -> T {
        let mut buf = vec![0i64; self.lattice.dim()];
        let mut acc = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = c.norm_sqr();
            if m == T::zero() {
                continue;
            }
            self.lattice.write_freq(i, &mut buf);
            let sq = buf.iter().fold(T::zero(), |a, &k| {
                let k = T::of(k as f64);
                a + k * k
            });
            acc = acc + (T::one() + sq).powf(s) * m;
        }
        acc.sqrt()
    }

    /// `Σ |c(n)|^2`, the mean square over the torus.
    pub fn l2_sq(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Samples the field on a uniform grid with `m` points per dimension.
    pub fn to_physical(&self, m: usize) -> Result<PhysicalGrid<T>> {
        PhysicalGrid::from_field(self, m)
    }

    /// Reads coefficients for a box of the given cutoff off a physical grid.
    pub fn from_physical(grid: &PhysicalGrid<T>, cutoff: usize, real: bool) -> Result<Self> {
        grid.to_field(cutoff, real)
    }

    pub(crate) fn check_same(&self, other: &SpectralField<T>) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::Dimension(format!(
                "lattice (d={}, N={}) vs (d={}, N={})",
                self.lattice.dim(),
                self.lattice.cutoff(),
                other.lattice.dim(),
                other.lattice.cutoff()
            )));
        }
        Ok(())
    }

    pub(crate) fn from_raw(lattice: Lattice, coeffs: Vec<Complex<T>>, real: bool) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        SpectralField { lattice, coeffs, real }
    }
}

impl<T: Scalar> Add for &SpectralField<T> {
    type Output = Result<SpectralField<T>>;

    fn add(self, rhs: Self) -> Self::Output {
        let mut out = self.clone();
        out.add_scaled(T::one(), rhs)?;
        Ok(out)
    }
}

impl<T: Scalar> Sub for &SpectralField<T> {
    type Output = Result<SpectralField<T>>;

    fn sub(self, rhs: Self) -> Self::Output {
        let mut out = self.clone();
        out.add_scaled(-T::one(), rhs)?;
        Ok(out)
    }
}

/// Time-sampled spectral fields on a common lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeField<T> {
    times: Vec<T>,
    frames: Vec<SpectralField<T>>,
}

impl<T: Scalar> SpacetimeField<T> {
    pub fn new(times: Vec<T>, frames: Vec<SpectralField<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != frames.len() {
            return Err(Error::Dimension(format!(
                "{} times for {} frames",
                times.len(),
                frames.len()
            )));
        }
        if times[0] != T::zero() {
            return Err(domain("time grid must start at 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("time grid must be strictly increasing"));
        }
        let first = &frames[0];
        for f in &frames[1..] {
            first.check_same(f)?;
            if f.is_real() != first.is_real() {
                return Err(domain("frames disagree on the reality flag"));
            }
        }
        Ok(SpacetimeField { times, frames })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn frames(&self) -> &[SpectralField<T>] {
        &self.frames
    }

    pub fn lattice(&self) -> &Lattice {
        self.frames[0].lattice()
    }

    pub fn end(&self) -> T {
        *self.times.last().expect("nonempty")
    }

    /// Piecewise-linear interpolation in time.
    pub fn at(&self, t: T) -> Result<SpectralField<T>> {
        if t < T::zero() || t > self.end() {
            return Err(domain(format!("time {t} outside [0, {}]", self.end())));
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Ok(self.frames[0].clone());
        }
        let lo = k - 1;
        if lo + 1 == self.times.len() || self.times[lo] == t {
            return Ok(self.frames[lo].clone());
        }
        let (t0, t1) = (self.times[lo], self.times[lo + 1]);
        let w = (t - t0) / (t1 - t0);
        let mut out = self.frames[lo].scale(T::one() - w);
        out.add_scaled(w, &self.frames[lo + 1])?;
        Ok(out)
    }

    /// `max_j sobolev_norm(frame_j, s)`: the discrete `C_T H^s` norm.
    pub fn sup_sobolev(&self, s: T) -> T {
        self.frames.iter().map(|f| f.sobolev_norm(s)).fold(T::zero(), T::max)
    }

    pub fn map_frames(&self, f: impl FnMut(&SpectralField<T>) -> SpectralField<T>) -> Result<Self> {
        Self::new(self.times.clone(), self.frames.iter().map(f).collect())
    }
}
