use approx::assert_relative_eq;
use wicklab_core::propagator::{duhamel, duhamel_with, g_covariance, wave_kernel, QuadratureRule};
use wicklab_core::spectral::{bracket, Lattice, SpacetimeField, SpectralField};
use wicklab_core::stochastic::{sigma_n, wick_power, GaussianDraw, LinearSolution, WickSpec};
use wicklab_core::{Complex, Result};

fn omega(n: &[i64], alpha: f64) -> f64 {
    bracket(n).powf(alpha)
}

fn cos_forcing(lat: Lattice, alpha: f64) -> impl Fn(f64) -> Result<SpectralField<f64>> {
    move |tau| Ok(SpectralField::from_fn(lat, true, |n| Complex::new((tau * omega(n, alpha)).cos(), 0.0)))
}

#[test]
fn resonant_forcing_closed_form() {
    let lat = Lattice::new(1, 6).unwrap();
    let (t, alpha) = (1.7, 0.8);
    let exact = |n: &[i64]| {
        let w = omega(n, alpha);
        t * (t * w).sin() / (2.0 * w)
    };
    let rule = QuadratureRule::gauss_legendre(24, t).unwrap();
    let out = duhamel_with(lat, t, alpha, &rule, cos_forcing(lat, alpha)).unwrap();
    for (i, n) in lat.iter().enumerate() {
        assert_relative_eq!(out.coeffs()[i].re, exact(&n.0), epsilon = 1e-12);
    }
    let err = |m: usize| {
        let r = QuadratureRule::trapezoid(m, t).unwrap();
        let out = duhamel_with(lat, t, alpha, &r, cos_forcing(lat, alpha)).unwrap();
        lat.iter()
            .enumerate()
            .map(|(i, n)| (out.coeffs()[i].re - exact(&n.0)).abs())
            .fold(0.0, f64::max)
    };
    // The integrand is sin(tω)/2ω plus a term odd about τ = t/2, which the
    // symmetric trapezoid nodes cancel exactly.
    for m in [5, 9, 33, 65] {
        assert!(err(m) < 1e-13, "m = {m}: {}", err(m));
    }
}

#[test]
fn constant_forcing_rate() {
    let lat = Lattice::new(2, 3).unwrap();
    let (t, alpha) = (2.0, 0.6);
    let one = SpectralField::from_fn(lat, true, |_| Complex::new(1.0, 0.0));
    let st = SpacetimeField::new(vec![0.0, t], vec![one.clone(), one]).unwrap();
    let exact = |n: &[i64]| {
        let w = omega(n, alpha);
        (1.0 - (t * w).cos()) / (w * w)
    };
    let err = |m: usize| {
        let out = duhamel(&st, t, alpha, &QuadratureRule::trapezoid(m, t).unwrap()).unwrap();
        lat.iter()
            .enumerate()
            .map(|(i, n)| (out.coeffs()[i].re - exact(&n.0)).abs())
            .fold(0.0, f64::max)
    };
    let rate = (err(17) / err(33)).log2();
    assert!((rate - 2.0).abs() < 0.2, "rate {rate}");
}

/// `max_n |(f(t+h) - 2f(t) + f(t-h))/h² + ω² f(t) - g(t)|`.
fn wave_defect(
    lat: &Lattice,
    alpha: f64,
    f: impl Fn(f64) -> SpectralField<f64>,
    g: &SpectralField<f64>,
    t: f64,
    h: f64,
) -> f64 {
    let (a, b, c) = (f(t - h), f(t), f(t + h));
    lat.iter()
        .enumerate()
        .map(|(i, n)| {
            let w2 = omega(&n.0, alpha).powi(2);
            let d2 = (a.coeffs()[i] - b.coeffs()[i] * 2.0 + c.coeffs()[i]) / (h * h);
            (d2 + b.coeffs()[i] * w2 - g.coeffs()[i]).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_solution_solves_the_wave_equation() {
    let lat = Lattice::new(1, 8).unwrap();
    let (alpha, beta, t) = (0.5, 0.4, 0.9);
    let lin = LinearSolution::new(GaussianDraw::sample(lat, 3), beta, alpha);
    let zero = SpectralField::zeros(lat, true);
    let e1 = wave_defect(&lat, alpha, |s| lin.at(s), &zero, t, 0.02);
    let e2 = wave_defect(&lat, alpha, |s| lin.at(s), &zero, t, 0.01);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    assert!(e2 < 1e-3);
}

#[test]
fn duhamel_inverts_the_wave_operator() {
    let base = Lattice::new(1, 6).unwrap();
    let lat = base.with_cutoff(12);
    let (alpha, beta, t) = (0.5, 0.4, 0.6);
    let lin = LinearSolution::new(GaussianDraw::sample(base, 11), beta, alpha);
    let spec = WickSpec::new(2, sigma_n(&base, beta)).unwrap();
    let forcing = move |tau: f64| wick_power(&lin.at(tau), spec);
    let image = |s: f64| {
        let rule = QuadratureRule::gauss_legendre(40, s).unwrap();
        duhamel_with(lat, s, alpha, &rule, &forcing).unwrap()
    };
    let g = forcing(t).unwrap();
    let e1 = wave_defect(&lat, alpha, image, &g, t, 0.02);
    let e2 = wave_defect(&lat, alpha, image, &g, t, 0.01);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn covariance_kernel_is_symmetric_and_stationary() {
    let alpha = 0.7;
    for n in [[0i64], [1], [5], [-9]] {
        for (a, b) in [(0.0, 0.3), (1.2, 0.4), (2.5, 2.5)] {
            let k = g_covariance(&n, a, b, alpha);
            assert_eq!(k, g_covariance(&n, b, a, alpha));
            assert_relative_eq!(k, g_covariance(&n, a + 0.8, b + 0.8, alpha), epsilon = 1e-12);
        }
        assert_eq!(wave_kernel(&n, 0.0, alpha), 0.0);
    }
}
