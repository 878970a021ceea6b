use num_complex::Complex;

use crate::error::{domain, Result};
use crate::spectral::{Lattice, SpacetimeField, SpectralField};
use crate::Scalar;

use super::quadrature::QuadratureRule;

/// Per-mode frequencies `⟨n⟩^α`.
fn omegas<T: Scalar>(lattice: &Lattice, alpha: T) -> Vec<T> {
    lattice.brackets::<T>().into_iter().map(|b| b.powf(alpha)).collect()
}

/// `∫_0^t S_n(t - τ) F̂(n, τ) dτ` with the integrand supplied as a function
/// of `τ`, evaluated at the rule's nodes.
pub fn duhamel_with<T: Scalar>(
    lattice: Lattice,
    t: T,
    alpha: T,
    rule: &QuadratureRule<T>,
    mut integrand: impl FnMut(T) -> Result<SpectralField<T>>,
) -> Result<SpectralField<T>> {
    if (rule.end() - t).abs() > T::of(1e-12) * t.abs().max(T::one()) {
        return Err(domain(format!("rule covers [0, {}] but t = {t}", rule.end())));
    }
    let om = omegas(&lattice, alpha);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); lattice.len()];
    let mut real = true;
    for (&tau, &w) in rule.nodes().iter().zip(rule.weights()) {
        let f = integrand(tau)?;
        if *f.lattice() != lattice {
            return Err(crate::Error::Dimension("integrand lattice differs from the target".into()));
        }
        real &= f.is_real();
        for ((a, c), &o) in acc.iter_mut().zip(f.coeffs()).zip(&om) {
            let s = ((t - tau) * o).sin() / o;
            *a = *a + *c * (w * s);
        }
    }
    let mut out = SpectralField::from_raw(lattice, acc, false);
    if real {
        out.enforce_reality();
    }
    Ok(out)
}

/// Duhamel image of time-sampled data, interpolated piecewise-linearly
/// between frames.
pub fn duhamel<T: Scalar>(f: &SpacetimeField<T>, t: T, alpha: T, rule: &QuadratureRule<T>) -> Result<SpectralField<T>> {
    if t < T::zero() || t > f.end() {
        return Err(domain(format!("t = {t} outside the field's range [0, {}]", f.end())));
    }
    duhamel_with(*f.lattice(), t, alpha, rule, |tau| f.at(tau.min(f.end())))
}

/// Duhamel image at every grid time, by the trapezoid rule on the grid
/// nodes themselves.
///
/// Using `sin((t_j - τ)ω) = sin(t_j ω) cos(τ ω) - cos(t_j ω) sin(τ ω)` the
/// trapezoid sums become running sums, so the whole trajectory costs one
/// pass over the frames.
pub fn duhamel_trapezoid_grid<T: Scalar>(f: &SpacetimeField<T>, alpha: T) -> Result<SpacetimeField<T>> {
    let lattice = *f.lattice();
    let om = omegas(&lattice, alpha);
    let times = f.times();
    let frames = f.frames();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::of(0.5);
    let mut cos_sum = vec![zero; lattice.len()];
    let mut sin_sum = vec![zero; lattice.len()];
    let mut out = Vec::with_capacity(frames.len());
    out.push(SpectralField::zeros(lattice, frames[0].is_real()));
    for j in 1..times.len() {
        let h = times[j] - times[j - 1];
        let (t_prev, t_cur) = (times[j - 1], times[j]);
        let mut coeffs = vec![zero; lattice.len()];
        for i in 0..lattice.len() {
            let o = om[i];
            let (sp, cp) = (t_prev * o).sin_cos();
            let (sc, cc) = (t_cur * o).sin_cos();
            let fp = frames[j - 1].coeffs()[i];
            let fc = frames[j].coeffs()[i];
            cos_sum[i] = cos_sum[i] + (fp * cp + fc * cc) * (h * half);
            sin_sum[i] = sin_sum[i] + (fp * sp + fc * sc) * (h * half);
            coeffs[i] = (cos_sum[i] * sc - sin_sum[i] * cc) / o;
        }
        let mut frame = SpectralField::from_raw(lattice, coeffs, false);
        if frames[0].is_real() {
            frame.enforce_reality();
        }
        out.push(frame);
    }
    SpacetimeField::new(times.to_vec(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::wave_kernel;

    fn constant_in_time(lattice: Lattice, times: &[f64]) -> SpacetimeField<f64> {
        let one = SpectralField::from_fn(lattice, true, |_| Complex::new(1.0, 0.0));
        SpacetimeField::new(times.to_vec(), vec![one; times.len()]).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let lat = Lattice::new(1, 3).unwrap();
        let z = SpectralField::<f64>::zeros(lat, true);
        let st = SpacetimeField::new(vec![0.0, 1.0], vec![z.clone(), z]).unwrap();
        let rule = QuadratureRule::trapezoid(8, 0.7).unwrap();
        assert_eq!(duhamel(&st, 0.7, 0.5, &rule).unwrap().max_abs(), 0.0);
        assert!(duhamel(&st, 1.5, 0.5, &rule).is_err());
    }

    #[test]
    fn grid_trapezoid_matches_direct_trapezoid() {
        let lat = Lattice::new(1, 4).unwrap();
        let times: Vec<f64> = (0..=20).map(|j| j as f64 * 0.05).collect();
        let frames = times
            .iter()
            .map(|&t| SpectralField::from_fn(lat, true, |n| Complex::new((t * (1.0 + n[0] as f64)).cos(), 0.3 * t)))
            .collect();
        let st = SpacetimeField::new(times.clone(), frames).unwrap();
        let grid = duhamel_trapezoid_grid(&st, 0.8).unwrap();
        for j in [1usize, 7, 20] {
            let t = times[j];
            for (i, n) in lat.iter().enumerate() {
                let mut direct = Complex::new(0.0, 0.0);
                for k in 0..=j {
                    let w = if k == 0 || k == j { 0.025 } else { 0.05 };
                    direct += st.frames()[k].coeffs()[i] * (w * wave_kernel(&n.0, t - times[k], 0.8));
                }
                assert!((grid.frames()[j].coeffs()[i] - direct).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_forcing_closed_form() {
        let lat = Lattice::new(1, 2).unwrap();
        let (t, alpha) = (1.3, 0.9);
        let st = constant_in_time(lat, &[0.0, t]);
        let exact = |n: &[i64]| {
            let w = crate::spectral::bracket(n).powf(alpha);
            (1.0 - (t * w).cos()) / (w * w)
        };
        let gl = duhamel(&st, t, alpha, &QuadratureRule::gauss_legendre(20, t).unwrap()).unwrap();
        for (i, n) in lat.iter().enumerate() {
            assert!((gl.coeffs()[i].re - exact(&n.0)).abs() < 1e-13);
        }
        let err = |m: usize| {
            let r = duhamel(&st, t, alpha, &QuadratureRule::trapezoid(m, t).unwrap()).unwrap();
            (r.get(&[2]).re - exact(&[2])).abs()
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }
}
