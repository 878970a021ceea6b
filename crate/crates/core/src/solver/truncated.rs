use super::forcing::uniform_grid;
use super::params::ParamSet;
use crate::error::{domain, Error, Result};
use crate::propagator::default_nodes;
use crate::spectral::{SpacetimeField, SpectralField};
use crate::stochastic::{data_from_draw, sigma_n, wick_power, GaussianDraw, WickSpec};

/// Largest growth of the phase-space norm accepted in one step.
pub const GROWTH_LIMIT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedOptions {
    pub steps: usize,
    /// With `false` the flow is linear and the integrator exact.
    pub nonlinear: bool,
}

/// `u_N` and `∂_t u_N` on a uniform grid.
#[derive(Clone, Debug)]
pub struct TruncatedSolution {
    pub u: SpacetimeField<f64>,
    pub velocity: SpacetimeField<f64>,
}

/// Step count resolving the nonlinearity: `h Λ ≤ 0.2` with the effective
/// frequency `Λ = (k (3 σ_N^{1/2})^{k-1})^{1/2}` of `H_k(u; σ_N)` at a
/// three-standard-deviation amplitude. At least the propagator default.
pub fn default_steps(params: &ParamSet) -> Result<usize> {
    let lattice = params.lattice()?;
    let corner = (1.0 + (params.d * params.cutoff * params.cutoff) as f64).sqrt();
    let linear = default_nodes(params.horizon, corner.powf(params.alpha));
    let amp = 3.0 * sigma_n(&lattice, params.beta).sqrt();
    let lambda = (params.k as f64 * amp.powi(params.k as i32 - 1)).sqrt();
    Ok(linear.max((params.horizon * lambda / 0.2).ceil() as usize))
}

/// Solves `∂_t² u + ⟨∇⟩^{2α} u + P_N H_k(u; σ_N) = 0` with data
/// `(P_N u_0, P_N u_1)` from `params.seed`.
pub fn solve_truncated(params: &ParamSet, opts: TruncatedOptions) -> Result<SpacetimeField<f64>> {
    params.validate()?;
    let draw = GaussianDraw::sample(params.lattice()?, params.seed);
    Ok(solve_truncated_with(params, &draw, opts)?.u)
}

/// Gautschi's trigonometric integrator in one-step form on each Fourier
/// mode, `ξ = hΩ`, `Ω = ⟨n⟩^α`, `g = -P_N H_k(·; σ_N)`:
///
/// `u⁺ = cos ξ u + Ω⁻¹ sin ξ u̇ + h²/2 ψ(ξ) g(u)`,
/// `u̇⁺ = -Ω sin ξ u + cos ξ u̇ + h/2 ψ₁(ξ) (cos ξ g(u) + g(u⁺))`,
///
/// with `ψ(ξ) = sinc²(ξ/2)`, exact for forcing frozen at the midpoint of
/// the two-step scheme, and `ψ₁(ξ) = ψ(ξ)/sinc(ξ)`, which makes the scheme
/// symmetric. The linear flow is exact. Steps with `hΩ ≥ π` are rejected.
pub fn solve_truncated_with(params: &ParamSet, draw: &GaussianDraw<f64>, opts: TruncatedOptions) -> Result<TruncatedSolution> {
    params.validate()?;
    let lattice = params.lattice()?;
    if *draw.lattice() != lattice {
        return Err(Error::Dimension(format!(
            "draw on cutoff {} for parameters with cutoff {}",
            draw.lattice().cutoff(),
            params.cutoff
        )));
    }
    if opts.steps == 0 {
        return Err(domain("the integrator needs at least one step"));
    }
    let times = uniform_grid(params.horizon, opts.steps);
    let h = params.horizon / opts.steps as f64;
    let sigma = sigma_n(&lattice, params.beta);
    let omega: Vec<f64> = lattice.brackets::<f64>().into_iter().map(|b| b.powf(params.alpha)).collect();
    let xi_max = h * omega.iter().fold(0.0, |m: f64, &o| m.max(o));
    if xi_max >= std::f64::consts::PI {
        return Err(domain(format!("step {h} gives hΩ = {xi_max:.3} >= π; use more steps")));
    }
    let (cos, sin): (Vec<f64>, Vec<f64>) = omega
        .iter()
        .map(|o| {
            let (s, c) = (h * o).sin_cos();
            (c, s)
        })
        .unzip();
    let psi: Vec<f64> = omega.iter().map(|o| sinc(0.5 * h * o).powi(2)).collect();
    let psi1: Vec<f64> = omega.iter().zip(&psi).map(|(o, p)| p / sinc(h * o)).collect();
    let force = |u: &SpectralField<f64>| -> Result<SpectralField<f64>> {
        if !opts.nonlinear {
            return Ok(SpectralField::zeros(lattice, true));
        }
        Ok(wick_power(u, WickSpec::new(params.k, sigma)?)?.resize(params.cutoff).scale(-1.0))
    };
    let phase_norm = |u: &SpectralField<f64>, v: &SpectralField<f64>| {
        (u.sobolev_norm(params.sigma).powi(2) + v.sobolev_norm(params.sigma - params.alpha).powi(2)).sqrt()
    };

    let (mut u, mut v) = data_from_draw(draw, params.beta, params.alpha);
    let mut g = force(&u)?;
    let mut us = vec![u.clone()];
    let mut vs = vec![v.clone()];
    for step in 1..=opts.steps {
        let before = phase_norm(&u, &v);
        let un: Vec<_> = (0..lattice.len())
            .map(|i| {
                let o = omega[i];
                u.coeffs()[i] * cos[i] + v.coeffs()[i] * (sin[i] / o) + g.coeffs()[i] * (0.5 * h * h * psi[i])
            })
            .collect();
        let mut u_next = SpectralField::from_raw(lattice, un, false);
        u_next.enforce_reality();
        let g_next = force(&u_next)?;
        let vn: Vec<_> = (0..lattice.len())
            .map(|i| {
                let o = omega[i];
                -(u.coeffs()[i] * (o * sin[i]))
                    + v.coeffs()[i] * cos[i]
                    + (g.coeffs()[i] * cos[i] + g_next.coeffs()[i]) * (0.5 * h * psi1[i])
            })
            .collect();
        let mut v_next = SpectralField::from_raw(lattice, vn, false);
        v_next.enforce_reality();
        let after = phase_norm(&u_next, &v_next);
        if !after.is_finite() || (before > 0.0 && after > GROWTH_LIMIT * before) {
            return Err(Error::Instability(format!(
                "phase-space norm grew from {before:.3e} to {after:.3e} at step {step} (t = {:.6}); reduce the step",
                times[step]
            )));
        }
        u = u_next;
        v = v_next;
        g = g_next;
        us.push(u.clone());
        vs.push(v.clone());
    }
    Ok(TruncatedSolution {
        u: SpacetimeField::new(times.clone(), us)?,
        velocity: SpacetimeField::new(times, vs)?,
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::linear_solution;

    fn params() -> ParamSet {
        ParamSet {
            cutoff: 16,
            horizon: 0.5,
            ..ParamSet::default()
        }
    }

    #[test]
    fn linear_flow_is_exact() {
        let p = params();
        let draw = GaussianDraw::sample(p.lattice().unwrap(), p.seed);
        let sol = solve_truncated_with(&p, &draw, TruncatedOptions { steps: 40, nonlinear: false }).unwrap();
        for (t, f) in sol.u.times().iter().zip(sol.u.frames()) {
            let z = linear_solution(&draw, p.beta, p.alpha, *t).unwrap();
            for (a, b) in f.coeffs().iter().zip(z.coeffs()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_energy_is_conserved() {
        let p = ParamSet { horizon: 3.0, ..params() };
        let draw = GaussianDraw::sample(p.lattice().unwrap(), 4);
        let sol = solve_truncated_with(&p, &draw, TruncatedOptions { steps: 300, nonlinear: false }).unwrap();
        let lat = p.lattice().unwrap();
        let om: Vec<f64> = lat.brackets::<f64>().into_iter().map(|b| b.powf(p.alpha)).collect();
        let energy = |j: usize| -> Vec<f64> {
            let (u, v) = (&sol.u.frames()[j], &sol.velocity.frames()[j]);
            (0..lat.len()).map(|i| v.coeffs()[i].norm_sqr() + om[i].powi(2) * u.coeffs()[i].norm_sqr()).collect()
        };
        let (e0, e1) = (energy(0), energy(300));
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        }
    }

    #[test]
    fn odd_degree_zero_data_persists() {
        let p = ParamSet { k: 3, ..params() };
        let lat = p.lattice().unwrap();
        let zero = vec![num_complex::Complex::new(0.0, 0.0); lat.len()];
        let draw = GaussianDraw::from_parts(lat, 0, zero.clone(), zero.clone()).unwrap();
        let sol = solve_truncated_with(&p, &draw, TruncatedOptions { steps: 20, nonlinear: true }).unwrap();
        assert!(sol.u.frames().iter().all(|f| f.l2_sq() == 0.0));
        let p = ParamSet { k: 2, ..params() };
        let draw = GaussianDraw::from_parts(lat, 0, zero.clone(), zero).unwrap();
        let sol = solve_truncated_with(&p, &draw, TruncatedOptions { steps: 20, nonlinear: true }).unwrap();
        assert!(sol.u.frames()[20].l2_sq() > 0.0);
    }

    #[test]
    fn second_order_in_the_step() {
        let p = params();
        let norm = |steps: usize| {
            let u = solve_truncated(&p, TruncatedOptions { steps, nonlinear: true }).unwrap();
            u.frames().last().unwrap().sobolev_norm(p.sigma)
        };
        let (a, b, c) = (norm(20), norm(40), norm(80));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 4.0).abs() < 0.6, "{ratio}");
    }

    #[test]
    fn blow_up_is_detected() {
        let p = ParamSet { k: 3, beta: 0.0, cutoff: 2, horizon: 20.0, ..params() };
        let err = solve_truncated(&p, TruncatedOptions { steps: 10, nonlinear: true }).unwrap_err();
        assert!(matches!(err, Error::Instability(_)), "{err}");
    }

    #[test]
    fn coarse_step_is_rejected() {
        let p = ParamSet { horizon: 20.0, ..params() };
        let err = solve_truncated(&p, TruncatedOptions { steps: 4, nonlinear: false }).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn default_step_count() {
        let p = ParamSet::default();
        assert!(default_steps(&p).unwrap() >= 16);
    }
}
