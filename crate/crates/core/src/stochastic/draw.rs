use num_complex::Complex;

use super::rng::{freq_counter, normal_pair, STREAM_G, STREAM_H};
use crate::error::{domain, Result};
use crate::spectral::{Lattice, SpectralField};
use crate::Scalar;

/// One realization of the Gaussian families `{g_n}`, `{h_n}` over a box.
///
/// On the half-lattice (first nonzero coordinate positive) real and
/// imaginary parts are independent `N(0, 1/2)`, so `E|g_n|^2 = 1`; `g_0` is
/// a real `N(0, 1)`; the remaining entries are conjugates.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDraw<T> {
    lattice: Lattice,
    seed: u64,
    g: Vec<Complex<T>>,
    h: Vec<Complex<T>>,
}

impl<T: Scalar> GaussianDraw<T> {
    /// Draws `g`, `h` for `seed`. Entries depend only on `(seed, n)`, so
    /// boxes of different cutoffs agree on their common frequencies.
    pub fn sample(lattice: Lattice, seed: u64) -> Self {
        let len = lattice.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut g = vec![zero; len];
        let mut h = vec![zero; len];
        let center = lattice.center();
        let mut buf = vec![0i64; lattice.dim()];
        let half = std::f64::consts::FRAC_1_SQRT_2;
        for i in center..len {
            lattice.write_freq(i, &mut buf);
            let counter = freq_counter(&buf);
            for (stream, out) in [(STREAM_G, &mut g), (STREAM_H, &mut h)] {
                let (a, b) = normal_pair(seed, stream, counter);
                if i == center {
                    out[i] = Complex::new(T::of(a), T::zero());
                } else {
                    let c = Complex::new(T::of(a * half), T::of(b * half));
                    out[i] = c;
                    out[lattice.neg_index(i)] = c.conj();
                }
            }
        }
        GaussianDraw { lattice, seed, g, h }
    }

    /// Assembles a draw from explicit values (test draws). Symmetry and a
    /// real zero mode are required exactly.
    pub fn from_parts(lattice: Lattice, seed: u64, g: Vec<Complex<T>>, h: Vec<Complex<T>>) -> Result<Self> {
        for (name, v) in [("g", &g), ("h", &h)] {
            if v.len() != lattice.len() {
                return Err(domain(format!("{name} has {} entries, lattice has {}", v.len(), lattice.len())));
            }
            for i in 0..lattice.len() {
                if v[lattice.neg_index(i)] != v[i].conj() {
                    return Err(domain(format!("{name} breaks conjugate symmetry at {}", lattice.freq(i))));
                }
            }
        }
        Ok(GaussianDraw { lattice, seed, g, h })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn g(&self) -> &[Complex<T>] {
        &self.g
    }

    pub fn h(&self) -> &[Complex<T>] {
        &self.h
    }

    /// Restriction to a smaller box (or zero extension to a larger one).
    pub fn resize(&self, cutoff: usize) -> Self {
        let target = self.lattice.with_cutoff(cutoff);
        let zero = Complex::new(T::zero(), T::zero());
        let mut g = vec![zero; target.len()];
        let mut h = vec![zero; target.len()];
        for (i, j) in self.lattice.reindex_into(&target).into_iter().enumerate() {
            if let Some(j) = j {
                g[j] = self.g[i];
                h[j] = self.h[i];
            }
        }
        GaussianDraw {
            lattice: target,
            seed: self.seed,
            g,
            h,
        }
    }
}

/// The random data `u_0 = Σ g_n ⟨n⟩^{-β} e^{inx}`,
/// `u_1 = Σ h_n ⟨n⟩^{α-β} e^{inx}`, together with the draw behind them.
pub fn sample_data<T: Scalar>(
    lattice: Lattice,
    beta: T,
    alpha: T,
    seed: u64,
) -> (SpectralField<T>, SpectralField<T>, GaussianDraw<T>) {
    let draw = GaussianDraw::sample(lattice, seed);
    let (u0, u1) = data_from_draw(&draw, beta, alpha);
    (u0, u1, draw)
}

pub fn data_from_draw<T: Scalar>(draw: &GaussianDraw<T>, beta: T, alpha: T) -> (SpectralField<T>, SpectralField<T>) {
    let lat = draw.lattice;
    let br = lat.brackets::<T>();
    let u0 = draw.g.iter().zip(&br).map(|(g, b)| *g * b.powf(-beta)).collect();
    let u1 = draw.h.iter().zip(&br).map(|(h, b)| *h * b.powf(alpha - beta)).collect();
    (
        SpectralField::from_raw(lat, u0, true),
        SpectralField::from_raw(lat, u1, true),
    )
}

/// The random linear solution
/// `Ẑ(n, t) = (cos(t⟨n⟩^α) g_n + sin(t⟨n⟩^α) h_n) / ⟨n⟩^β`, with the
/// per-mode factors precomputed for repeated evaluation in time.
#[derive(Clone, Debug)]
pub struct LinearSolution<T> {
    draw: GaussianDraw<T>,
    freq: Vec<T>,
    amp: Vec<T>,
}

impl<T: Scalar> LinearSolution<T> {
    pub fn new(draw: GaussianDraw<T>, beta: T, alpha: T) -> Self {
        let br = draw.lattice.brackets::<T>();
        let freq = br.iter().map(|b| b.powf(alpha)).collect();
        let amp = br.iter().map(|b| b.powf(-beta)).collect();
        LinearSolution { draw, freq, amp }
    }

    pub fn draw(&self) -> &GaussianDraw<T> {
        &self.draw
    }

    pub fn lattice(&self) -> &Lattice {
        &self.draw.lattice
    }

    pub fn at(&self, t: T) -> SpectralField<T> {
        let coeffs = (0..self.freq.len())
            .map(|i| {
                let (s, c) = (t * self.freq[i]).sin_cos();
                (self.draw.g[i] * c + self.draw.h[i] * s) * self.amp[i]
            })
            .collect();
        SpectralField::from_raw(self.draw.lattice, coeffs, true)
    }

    /// Time derivative `∂_t Ẑ(n, t)`.
    pub fn velocity_at(&self, t: T) -> SpectralField<T> {
        let coeffs = (0..self.freq.len())
            .map(|i| {
                let w = self.freq[i];
                let (s, c) = (t * w).sin_cos();
                (self.draw.h[i] * c - self.draw.g[i] * s) * (self.amp[i] * w)
            })
            .collect();
        SpectralField::from_raw(self.draw.lattice, coeffs, true)
    }
}

/// `Z_N(t)` for a single time.
pub fn linear_solution<T: Scalar>(draw: &GaussianDraw<T>, beta: T, alpha: T, t: T) -> Result<SpectralField<T>> {
    if t < T::zero() {
        return Err(domain(format!("negative time {t}")));
    }
    Ok(LinearSolution::new(draw.clone(), beta, alpha).at(t))
}

/// `σ_N = Σ_{n in box} ⟨n⟩^{-2β}`, the pointwise variance of `Z_N`.
pub fn sigma_n<T: Scalar>(lattice: &Lattice, beta: T) -> T {
    let two_beta = beta + beta;
    lattice.brackets::<T>().into_iter().map(|b| b.powf(-two_beta)).sum()
}
