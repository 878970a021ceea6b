use rayon::prelude::*;

use super::object::ObjectSpec;
use super::table::{shell_indices, Accumulator, MomentEntry, MomentTable, Target};
use crate::error::{domain, Result};
use crate::spectral::{Lattice, SpectralField};
use crate::stochastic::rng::derive_seed;
use crate::stochastic::{GaussianDraw, LinearSolution};

/// Realizations per parallel batch. Results depend only on the seed, not
/// on how batches are scheduled.
pub const BATCH: usize = 32;

enum Probe {
    Mode(Option<usize>),
    Shell(Vec<usize>),
}

fn probes(lattice: &Lattice, targets: &[Target]) -> Vec<Probe> {
    targets
        .iter()
        .map(|t| match t {
            Target::Mode(n) => Probe::Mode(lattice.index(&n.0)),
            Target::Shell(j) => Probe::Shell(shell_indices(lattice, *j)),
        })
        .collect()
}

fn probe_value(probe: &Probe, f: &SpectralField<f64>) -> f64 {
    let c = f.coeffs();
    match probe {
        Probe::Mode(Some(i)) => c[*i].norm_sqr(),
        Probe::Mode(None) => 0.0,
        Probe::Shell(idx) if idx.is_empty() => 0.0,
        Probe::Shell(idx) => idx.iter().map(|&i| c[i].norm_sqr()).sum::<f64>() / idx.len() as f64,
    }
}

/// Sample means of `|X̂|²` over independent realizations `s = 0..samples`,
/// each drawn from `derive_seed(seed, s)`.
fn sample_moments(
    spec: &ObjectSpec,
    targets: &[Target],
    samples: usize,
    seed: u64,
    observe: impl Fn(&LinearSolution<f64>) -> Result<SpectralField<f64>> + Sync,
) -> Result<MomentTable> {
    spec.validate()?;
    if samples < 2 {
        return Err(domain(format!("need at least 2 samples, got {samples}")));
    }
    let lattice = spec.params.lattice()?;
    let out = spec.output_lattice()?;
    let probes = probes(&out, targets);
    let batches = samples.div_ceil(BATCH);
    let partial: Result<Vec<Vec<Accumulator>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Accumulator::default(); targets.len()];
            for s in b * BATCH..((b + 1) * BATCH).min(samples) {
                let draw = GaussianDraw::sample(lattice, derive_seed(seed, s as u64));
                let lin = LinearSolution::new(draw, spec.params.beta, spec.params.alpha);
                let f = observe(&lin)?;
                let f = if *f.lattice() == out { f } else { f.resize(out.cutoff()) };
                for (a, p) in acc.iter_mut().zip(&probes) {
                    a.push(probe_value(p, &f));
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Accumulator::default(); targets.len()];
    for part in partial? {
        for (t, p) in total.iter_mut().zip(&part) {
            t.merge(p);
        }
    }
    MomentTable::new(
        targets
            .iter()
            .zip(&total)
            .map(|(t, a)| MomentEntry::from_accumulator(t.clone(), a))
            .collect(),
    )
}

/// Monte Carlo estimate of `E|X̂(n,t)|²` per target.
pub fn mc_moment(spec: &ObjectSpec, targets: &[Target], samples: usize, seed: u64) -> Result<MomentTable> {
    sample_moments(spec, targets, samples, seed, |lin| spec.realize(lin))
}

/// Monte Carlo estimate of `E|X̂(n,t+h) - X̂(n,t)|²` on coupled
/// realizations, with `t` the spec's time.
pub fn delta_moment(spec: &ObjectSpec, h: f64, targets: &[Target], samples: usize, seed: u64) -> Result<MomentTable> {
    let later = spec.time + h;
    if !(later >= 0.0) {
        return Err(domain(format!("t + h = {later} is negative")));
    }
    let other = spec.at_time(later);
    sample_moments(spec, targets, samples, seed, |lin| {
        let a = spec.realize(lin)?;
        let b = other.realize(lin)?;
        &b - &a
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{delta_z_moment, exact_table, ObjectKind};
    use crate::solver::ParamSet;
    use crate::spectral::FreqVec;

    fn params(n: usize) -> ParamSet {
        ParamSet {
            cutoff: n,
            ..ParamSet::default()
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = ObjectSpec::new(ObjectKind::Z, params(8), 0.3).unwrap();
        let targets = vec![Target::Mode(FreqVec(vec![2])), Target::Shell(2)];
        let a = mc_moment(&spec, &targets, 70, 5).unwrap();
        let b = mc_moment(&spec, &targets, 70, 5).unwrap();
        assert_eq!(a, b);
        assert!(mc_moment(&spec, &targets, 1, 5).is_err());
        assert!(delta_moment(&spec, -0.5, &targets, 10, 5).is_err());
    }

    #[test]
    fn zero_increment_is_zero() {
        let spec = ObjectSpec::new(ObjectKind::WickPower(2), params(8), 0.3).unwrap();
        let t = delta_moment(&spec, 0.0, &[Target::Mode(FreqVec(vec![1])), Target::Shell(1)], 8, 1).unwrap();
        assert!(t.entries().iter().all(|e| e.estimate == 0.0));
    }

    #[test]
    fn linear_solution_moments_within_band() {
        let spec = ObjectSpec::new(ObjectKind::Z, params(16), 0.7).unwrap();
        let targets: Vec<Target> = (0..=8).map(|m| Target::Mode(FreqVec(vec![m]))).collect();
        let mc = mc_moment(&spec, &targets, 4000, 11).unwrap();
        let exact = exact_table(&spec, &targets).unwrap();
        for (m, e) in mc.entries().iter().zip(exact.entries()) {
            assert!((m.estimate - e.estimate).abs() < 4.0 * m.stderr, "{:?} vs {:?}", m, e);
        }
    }

    #[test]
    fn increments_of_linear_solution() {
        let spec = ObjectSpec::new(ObjectKind::Z, params(16), 0.2).unwrap();
        let h = 0.3;
        let targets: Vec<Target> = [1i64, 4, 9, 16].iter().map(|&m| Target::Mode(FreqVec(vec![m]))).collect();
        let mc = delta_moment(&spec, h, &targets, 4000, 3).unwrap();
        for e in mc.entries() {
            let Target::Mode(n) = &e.target else { unreachable!() };
            let exact = delta_z_moment(&n.0, 0.4, 0.5, h);
            assert!((e.estimate - exact).abs() < 4.0 * e.stderr, "{e:?} vs {exact}");
        }
    }
}
