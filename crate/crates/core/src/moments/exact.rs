use num_complex::Complex64;
use rayon::prelude::*;

use super::object::{ObjectKind, ObjectSpec};
use super::table::{shell_indices, MomentEntry, MomentTable, Target};
use crate::error::{domain, Error, Result};
use crate::propagator::QuadratureRule;
use crate::spectral::{bracket, pointwise_product, FreqVec, Lattice, SpectralField};

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `ℓ! (w^{*ℓ})(n)` with `w(m) = ⟨m⟩^{-2β}` on the box, for every `n` of
/// the box of cutoff `ℓN`.
pub fn exact_wick_moments(ell: usize, lattice: &Lattice, beta: f64) -> Result<SpectralField<f64>> {
    if ell == 0 {
        return Err(domain("Wick power must be at least 1"));
    }
    let w = SpectralField::from_fn(*lattice, true, |n| Complex64::new(bracket(n).powf(-2.0 * beta), 0.0));
    let conv = if ell == 1 {
        w
    } else {
        pointwise_product(&vec![&w; ell])?
    };
    Ok(conv.scale(factorial(ell)))
}

/// `E|:Z_N^ℓ:^(n)|²`, independent of time.
pub fn exact_wick_moment(ell: usize, lattice: &Lattice, beta: f64, n: &[i64]) -> Result<f64> {
    Ok(exact_wick_moments(ell, lattice, beta)?.get(n).re)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_0^t e^{icτ} dτ`.
fn exp_integral(c: f64, t: f64) -> Complex64 {
    Complex64::from_polar(t * sinc(0.5 * c * t), 0.5 * c * t)
}

/// `|∫_0^t sin(w(t-τ)) e^{iΩτ} dτ|² / w²`, the double time integral
/// `∫∫ S(t-τ₁) S(t-τ₂) cos((τ₁-τ₂)Ω)`. Closed form unless a rule is given.
pub fn duhamel_kernel(w: f64, omega: f64, t: f64, rule: Option<&QuadratureRule<f64>>) -> f64 {
    let j = match rule {
        None => (exp_integral(w - omega, t) - exp_integral(-w - omega, t)) / Complex64::new(0.0, 2.0),
        Some(r) => r
            .nodes()
            .iter()
            .zip(r.weights())
            .map(|(&tau, &wq)| Complex64::from_polar(wq * (w * (t - tau)).sin(), omega * tau))
            .sum(),
    };
    j.norm_sqr() / (w * w)
}

/// `E|Î(:Z_N^k:)(n,t)|²`: `k!` times the sum over `n = n₁ + … + n_k` in the
/// box of `Π ⟨n_i⟩^{-2β}` against the double time integral of the
/// product of the covariance kernels, expanded into cosines of
/// `ω₁ ± ω₂ ± … ± ω_k`.
pub fn exact_duhamel_moment(
    k: usize,
    lattice: &Lattice,
    beta: f64,
    alpha: f64,
    t: f64,
    n: &[i64],
    rule: Option<&QuadratureRule<f64>>,
) -> Result<f64> {
    if k == 0 {
        return Err(domain("Duhamel moment needs k >= 1"));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("negative time {t}")));
    }
    if n.len() != lattice.dim() {
        return Err(Error::Dimension(format!("frequency {n:?} in a d = {} lattice", lattice.dim())));
    }
    if let Some(r) = rule {
        if (r.end() - t).abs() > 1e-12 * t.max(1.0) {
            return Err(domain(format!("rule covers [0, {}] but t = {t}", r.end())));
        }
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let br = lattice.brackets::<f64>();
    let amp: Vec<f64> = br.iter().map(|b| b.powf(-2.0 * beta)).collect();
    let om: Vec<f64> = br.iter().map(|b| b.powf(alpha)).collect();
    let w = bracket(n).powf(alpha);
    let d = lattice.dim();
    let signs = 1usize << (k - 1);
    let mut total = 0.0;
    let mut idx = vec![0usize; k - 1];
    let mut rest = vec![0i64; d];
    let mut buf = vec![0i64; d];
    'tuples: loop {
        rest.copy_from_slice(n);
        let mut weight = 1.0;
        for &i in &idx {
            lattice.write_freq(i, &mut buf);
            for (r, b) in rest.iter_mut().zip(&buf) {
                *r -= b;
            }
            weight *= amp[i];
        }
        if let Some(last) = lattice.index(&rest) {
            weight *= amp[last];
            let mut sum = 0.0;
            for eps in 0..signs {
                let mut omega = om[last];
                for (bit, &i) in idx.iter().enumerate() {
                    omega += if eps >> bit & 1 == 0 { om[i] } else { -om[i] };
                }
                sum += duhamel_kernel(w, omega, t, rule);
            }
            total += weight * sum / signs as f64;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < lattice.len() {
                continue 'tuples;
            }
            *slot = 0;
        }
        break;
    }
    Ok(factorial(k) * total)
}

/// `E|δ_h Ẑ(n)|² = 2⟨n⟩^{-2β}(1 - cos(h⟨n⟩^α))`.
pub fn delta_z_moment(n: &[i64], beta: f64, alpha: f64, h: f64) -> f64 {
    let b = bracket(n);
    2.0 * b.powf(-2.0 * beta) * (1.0 - (h * b.powf(alpha)).cos())
}

/// Exact moment table for objects with a closed-form oracle (`Z`, Wick
/// powers, Duhamel images of Wick powers). Shell entries average the modes
/// of the shell inside the object's box.
pub fn exact_table(spec: &ObjectSpec, targets: &[Target]) -> Result<MomentTable> {
    spec.validate()?;
    let p = &spec.params;
    let lat = p.lattice()?;
    let out = spec.output_lattice()?;
    let per_mode: Box<dyn Fn(&[i64]) -> Result<f64> + Sync> = match spec.kind {
        ObjectKind::Z => Box::new(|n: &[i64]| {
            Ok(if lat.contains(n) {
                bracket(n).powf(-2.0 * p.beta)
            } else {
                0.0
            })
        }),
        ObjectKind::WickPower(l) => {
            let f = exact_wick_moments(l, &lat, p.beta)?;
            Box::new(move |n: &[i64]| Ok(f.get(n).re))
        }
        ObjectKind::DuhamelWick(k) => {
            let t = spec.time;
            Box::new(move |n: &[i64]| {
                if !out.contains(n) {
                    return Ok(0.0);
                }
                exact_duhamel_moment(k, &lat, p.beta, p.alpha, t, n, None)
            })
        }
        ObjectKind::Product { .. } => {
            return Err(Error::Unsupported("products have no closed-form moment oracle".into()))
        }
    };
    let entries: Result<Vec<MomentEntry>> = targets
        .par_iter()
        .map(|target| {
            let value = match target {
                Target::Mode(n) => per_mode(&n.0)?,
                Target::Shell(j) => {
                    let idx = shell_indices(&out, *j);
                    if idx.is_empty() {
                        0.0
                    } else {
                        let vals: Result<Vec<f64>> = idx.iter().map(|&i| per_mode(&out.freq(i).0)).collect();
                        vals?.iter().sum::<f64>() / idx.len() as f64
                    }
                }
            };
            Ok(MomentEntry::exact(target.clone(), value.max(0.0)))
        })
        .collect();
    MomentTable::new(entries?)
}

/// Per-mode targets for every frequency of `lattice`.
pub fn all_modes(lattice: &Lattice) -> Vec<Target> {
    lattice.iter().map(Target::Mode).collect()
}

/// Per-mode targets `n = (m, 0, …, 0)` for `0 ≤ m ≤ max`.
pub fn axis_modes(d: usize, max: i64) -> Vec<Target> {
    (0..=max)
        .map(|m| {
            let mut v = vec![0; d];
            v[0] = m;
            Target::Mode(FreqVec(v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wick_moment_examples() {
        let lat = Lattice::new(1, 1).unwrap();
        assert!((exact_wick_moment(2, &lat, 0.5, &[0]).unwrap() - 4.0).abs() < 1e-12);
        let lat = Lattice::new(1, 6).unwrap();
        for n in -6..=6i64 {
            let v = exact_wick_moment(1, &lat, 0.4, &[n]).unwrap();
            assert!((v - bracket(&[n]).powf(-0.8)).abs() < 1e-12);
        }
        assert_eq!(exact_wick_moment(1, &lat, 0.4, &[7]).unwrap(), 0.0);
        for n in 0..=18i64 {
            let a = exact_wick_moment(3, &lat, 0.3, &[n]).unwrap();
            let b = exact_wick_moment(3, &lat, 0.3, &[-n]).unwrap();
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn wick_moment_matches_brute_force() {
        let lat = Lattice::new(1, 5).unwrap();
        let w = |m: i64| bracket(&[m]).powf(-0.9);
        for n in -10..=10i64 {
            let mut s = 0.0;
            for a in -5..=5i64 {
                let b = n - a;
                if b.abs() <= 5 {
                    s += w(a) * w(b);
                }
            }
            assert!((exact_wick_moment(2, &lat, 0.45, &[n]).unwrap() - 2.0 * s).abs() < 1e-12);
        }
    }

    #[test]
    fn duhamel_moment_at_zero_time() {
        let lat = Lattice::new(1, 4).unwrap();
        for n in -4..=4 {
            assert_eq!(exact_duhamel_moment(2, &lat, 0.4, 0.5, 0.0, &[n], None).unwrap(), 0.0);
        }
    }

    #[test]
    fn duhamel_closed_form_matches_quadrature() {
        let lat = Lattice::new(1, 6).unwrap();
        let t = 0.8;
        let rule = QuadratureRule::gauss_legendre(40, t).unwrap();
        for k in 1..=3 {
            for n in [0i64, 1, 5, -9] {
                if (n.unsigned_abs() as usize) > k * 6 {
                    continue;
                }
                let a = exact_duhamel_moment(k, &lat, 0.4, 0.7, t, &[n], None).unwrap();
                let b = exact_duhamel_moment(k, &lat, 0.4, 0.7, t, &[n], Some(&rule)).unwrap();
                assert!((a - b).abs() < 1e-8 * a.max(1e-12), "k={k} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn first_order_duhamel_by_direct_double_integral() {
        // k = 1: ⟨n⟩^{-2β} ∫∫ S(t-τ₁) S(t-τ₂) cos((τ₁-τ₂)ω)
        let (beta, alpha, t) = (0.4, 0.5, 0.6);
        let lat = Lattice::new(1, 3).unwrap();
        let rule = QuadratureRule::gauss_legendre(30, t).unwrap();
        for n in [0i64, 2, -3] {
            let w = bracket(&[n]).powf(alpha);
            let s = |tau: f64| (w * (t - tau)).sin() / w;
            let inner = |t1: f64| rule.integrate(|t2| s(t1) * s(t2) * ((t1 - t2) * w).cos());
            let direct = bracket(&[n]).powf(-2.0 * beta) * rule.integrate(inner);
            let oracle = exact_duhamel_moment(1, &lat, beta, alpha, t, &[n], None).unwrap();
            assert!((direct - oracle).abs() < 1e-12, "{direct} vs {oracle}");
        }
    }

    #[test]
    fn delta_closed_form() {
        assert_eq!(delta_z_moment(&[3], 0.4, 0.5, 0.0), 0.0);
        let v = delta_z_moment(&[0], 0.0, 1.0, std::f64::consts::PI);
        assert!((v - 4.0).abs() < 1e-15);
    }
}
