use proptest::prelude::*;

use wicklab_core::chaos::{enumerate_pairings, pairing_count, Partition};
use wicklab_core::counting::conv_sum2;
use wicklab_core::solver::admissible_params;
use wicklab_core::spectral::{
    deserialize_field, grid_size, pointwise_product, read_field, serialize_field, write_field, FreqVec, Lattice,
    SpectralField,
};
use wicklab_core::stochastic::{hermite, sigma_n, wick_power, GaussianDraw, LinearSolution, WickSpec};
use wicklab_core::Complex;

fn field_from(lat: Lattice, real: bool, values: &[(f64, f64)]) -> SpectralField<f64> {
    let mut i = 0;
    SpectralField::from_fn(lat, real, |_| {
        let (re, im) = values[i % values.len()];
        i += 1;
        Complex::new(re, im)
    })
}

fn arb_field(d: usize, max_cutoff: usize) -> impl Strategy<Value = SpectralField<f64>> {
    (1..=max_cutoff, any::<bool>(), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..64))
        .prop_map(move |(n, real, v)| field_from(Lattice::new(d, n).unwrap(), real, &v))
}

/// Direct convolution of d = 1 coefficient lists indexed from `-N`.
fn convolve(a: &[Complex<f64>], b: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn hermite_series(k: usize, x: f64, sigma: f64) -> f64 {
    // k! [t^k] exp(t x - σ t²/2)
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    (0..=k / 2)
        .map(|j| fact(k) * x.powi((k - 2 * j) as i32) * (-sigma / 2.0).powi(j as i32) / (fact(j) * fact(k - 2 * j)))
        .sum()
}

fn count_matchings(j: usize, ell: usize) -> u128 {
    // Choose whether element 0 stays unpaired or pairs with one of the rest.
    if ell == 0 {
        return 1;
    }
    if j < 2 * ell {
        return 0;
    }
    count_matchings(j - 1, ell) + (j as u128 - 1) * count_matchings(j - 2, ell - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(f in prop_oneof![arb_field(1, 12), arb_field(2, 5)]) {
        let m = grid_size(2 * f.lattice().cutoff() + 1);
        let phys = f.to_physical(m).unwrap().mean_square();
        let spec = f.l2_sq();
        prop_assert!((phys - spec).abs() <= 1e-10 * spec.max(1e-300));
    }

    #[test]
    fn real_fields_have_real_samples(f in arb_field(2, 5)) {
        prop_assume!(f.is_real());
        let g = f.to_physical(16).unwrap();
        let top = g.values().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let imag = g.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        prop_assert!(imag <= 1e-10 * top.max(1e-300));
    }

    #[test]
    fn transform_roundtrip(f in arb_field(1, 16)) {
        let m = grid_size(2 * f.lattice().cutoff() + 1);
        let back = SpectralField::from_physical(&f.to_physical(m).unwrap(), f.lattice().cutoff(), f.is_real()).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn product_is_symmetric(f in arb_field(2, 4), g in arb_field(2, 4)) {
        let fg = pointwise_product(&[&f, &g]).unwrap();
        let gf = pointwise_product(&[&g, &f]).unwrap();
        let scale = fg.max_abs().max(1e-300);
        for (a, b) in fg.coeffs().iter().zip(gf.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn dealiased_product_is_exact(fs in prop::collection::vec(arb_field(1, 8), 1..=3)) {
        let refs: Vec<&SpectralField<f64>> = fs.iter().collect();
        let prod = pointwise_product(&refs).unwrap();
        let direct = fs[1..].iter().fold(fs[0].coeffs().to_vec(), |acc, f| convolve(&acc, f.coeffs()));
        prop_assert_eq!(direct.len(), prod.coeffs().len());
        let scale = direct.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        for (a, b) in direct.iter().zip(prod.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn wlf1_roundtrip(f in prop_oneof![arb_field(1, 10), arb_field(2, 4), arb_field(3, 2)]) {
        let g: SpectralField<f64> = deserialize_field(&serialize_field(&f)).unwrap();
        prop_assert_eq!(&f, &g);
    }

    #[test]
    fn hermite_scaling(k in 0usize..=8, x in -4.0..4.0f64, sigma in 0.05..3.0f64) {
        let lhs = hermite(k, x, sigma);
        let rhs = sigma.powf(k as f64 / 2.0) * hermite(k, x / sigma.sqrt(), 1.0);
        let scale = (x.abs() + sigma.sqrt()).powi(k as i32) * 4.0f64.powi(k as i32);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn hermite_matches_generating_function(k in 0usize..=12, x in -3.0..3.0f64, sigma in 0.1..2.0f64) {
        let a = hermite(k, x, sigma);
        let b = hermite_series(k, x, sigma);
        let scale = (x.abs() + sigma.sqrt()).powi(k as i32) * 2.0f64.powi(k as i32);
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }

    #[test]
    fn power_resummation(j in 0usize..=8, x in -3.0..3.0f64, sigma in 0.1..2.0f64) {
        let terms: Vec<f64> = (0..=j / 2)
            .map(|l| pairing_count(j, l) as f64 * hermite(j - 2 * l, x, sigma) * sigma.powi(l as i32))
            .collect();
        let sum: f64 = terms.iter().sum();
        let size: f64 = terms.iter().map(|t| t.abs()).sum::<f64>().max(x.abs().powi(j as i32));
        prop_assert!((sum - x.powi(j as i32)).abs() <= 1e-12 * size);
    }

    #[test]
    fn sampling_is_deterministic_and_nested(seed in any::<u64>(), n in 1usize..8) {
        let lat = Lattice::new(1, n).unwrap();
        let a: GaussianDraw<f64> = GaussianDraw::sample(lat, seed);
        let b: GaussianDraw<f64> = GaussianDraw::sample(lat, seed);
        prop_assert_eq!(a.g(), b.g());
        let big: GaussianDraw<f64> = GaussianDraw::sample(lat.with_cutoff(2 * n), seed);
        let small = big.resize(n);
        prop_assert_eq!(small.g(), a.g());
        prop_assert_eq!(small.h(), a.h());
    }

    #[test]
    fn second_wick_power_mean(seed in any::<u64>(), n in 1usize..10, t in 0.0..2.0f64) {
        let lat = Lattice::new(1, n).unwrap();
        let beta = 0.4;
        let lin = LinearSolution::new(GaussianDraw::sample(lat, seed), beta, 0.5);
        let z = lin.at(t);
        let sigma = sigma_n(&lat, beta);
        let w = wick_power(&z, WickSpec::new(2, sigma).unwrap()).unwrap();
        let expect = z.l2_sq() - sigma;
        prop_assert!((w.get(&[0]).re - expect).abs() <= 1e-12 * (z.l2_sq() + sigma));
        let one = wick_power(&z, WickSpec::new(1, sigma).unwrap()).unwrap();
        prop_assert_eq!(one.resize(n), z);
    }

    #[test]
    fn convolution_sum_is_even(a in 0.3..0.95f64, b in 0.3..0.95f64, m in -20i64..20) {
        prop_assume!(a + b > 1.05);
        let r = 64;
        let p = conv_sum2(1, a, b, &FreqVec::new(vec![m]), r).unwrap();
        let q = conv_sum2(1, a, b, &FreqVec::new(vec![-m]), r).unwrap();
        prop_assert!((p.value - q.value).abs() <= 1e-12 * p.value);
        prop_assert!(p.tail_bound > 0.0);
    }

    #[test]
    fn admissible_windows_are_consistent(k in 2usize..=4, alpha in 0.05..2.0f64, beta in 0.0..0.5f64) {
        let adm = admissible_params(1, k, alpha, beta);
        if let Some(w) = adm.window() {
            prop_assert!(w.lower < w.upper);
            prop_assert!(w.contains(w.midpoint()));
            prop_assert!(!w.contains(w.upper));
            prop_assert!(beta <= 0.5);
        }
    }
}

#[test]
fn pairing_counts_match_brute_force() {
    for j in 0..=10usize {
        for ell in 0..=j / 2 {
            let listed = enumerate_pairings(j, &Partition::singletons(j), ell).unwrap();
            assert_eq!(listed.len() as u128, count_matchings(j, ell), "J = {j}, l = {ell}");
            assert_eq!(pairing_count(j, ell), count_matchings(j, ell));
            for p in &listed {
                assert_eq!(p.len(), ell);
                assert_eq!(p.unpaired().len(), j - 2 * ell);
            }
        }
    }
}

#[test]
fn field_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.wlf");
    let lat = Lattice::new(2, 3).unwrap();
    let z = LinearSolution::new(GaussianDraw::sample(lat, 9), 0.4, 0.5).at(0.3);
    write_field(&path, &z).unwrap();
    let back: SpectralField<f64> = read_field(&path).unwrap();
    assert_eq!(back, z);
}
