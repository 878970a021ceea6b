use rayon::prelude::*;

use super::forcing::ForcingFamily;
use crate::error::{Error, Result};
use crate::propagator::duhamel_trapezoid_grid;
use crate::spectral::{pointwise_product, SpacetimeField, SpectralField};

/// One term `(-1)^{k2} k!/(k1! k2! k3!) :Z^{k1}: Y^{k2} v^{k3}` of the
/// remainder nonlinearity, `Y = I(:Z^k:)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemainderTerm {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub multinomial: u64,
}

impl RemainderTerm {
    /// Signed coefficient; the sign comes from `w = -Y + v`.
    pub fn coefficient(&self) -> f64 {
        let sign = if self.k2 % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.multinomial as f64
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `k! / Π k_i!`.
pub fn multinomial(parts: &[usize]) -> u64 {
    let k: usize = parts.iter().sum();
    parts.iter().fold(factorial(k), |acc, &p| acc / factorial(p))
}

/// All triples `k1 + k2 + k3 = k` with `k1 ≤ k - 1`: the term `:Z^k:` is
/// absorbed by the second-order expansion.
pub fn remainder_terms(k: usize) -> Vec<RemainderTerm> {
    let mut out = Vec::new();
    for k1 in 0..k {
        for k2 in 0..=(k - k1) {
            let k3 = k - k1 - k2;
            out.push(RemainderTerm {
                k1,
                k2,
                k3,
                multinomial: multinomial(&[k1, k2, k3]),
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    /// Stop once `‖v^{m+1} - v^m‖ < tol` in the discrete `C_T H^σ` norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-8, max_iter: 50 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    /// `‖v^m‖` for `m = 1, 2, …`.
    pub iterate_norms: Vec<f64>,
    /// `‖v^{m+1} - v^m‖` for `m = 0, 1, …`.
    pub increments: Vec<f64>,
    /// `‖v^{m+1} - v^m‖ / ‖v^m - v^{m-1}‖`.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    /// `‖v - Φ(v)‖` at the returned iterate.
    pub final_residual: f64,
}

/// Discrete `C_T H^s` distance of two trajectories on one grid.
pub fn ct_distance(a: &SpacetimeField<f64>, b: &SpacetimeField<f64>, s: f64) -> Result<f64> {
    if a.times() != b.times() {
        return Err(Error::Dimension("trajectories on different time grids".into()));
    }
    a.frames()
        .iter()
        .zip(b.frames())
        .map(|(x, y)| Ok((x - y)?.sobolev_norm(s)))
        .try_fold(0.0, |m, r: Result<f64>| Ok(f64::max(m, r?)))
}

/// `P_N Σ c_{k1k2k3} Ξ_{k1,k2} v^{k3}` at every grid time.
pub fn remainder_nonlinearity(forcing: &ForcingFamily, v: &SpacetimeField<f64>) -> Result<SpacetimeField<f64>> {
    let params = forcing.params();
    let lattice = *forcing.lattice();
    if *v.lattice() != lattice || v.times() != forcing.times() {
        return Err(Error::Dimension("remainder does not match the forcing grid".into()));
    }
    let terms = remainder_terms(params.k);
    let frames = (0..v.times().len())
        .into_par_iter()
        .map(|j| {
            let vj = &v.frames()[j];
            let mut acc = SpectralField::zeros(lattice, true);
            for term in &terms {
                let xi = &forcing.get(term.k1, term.k2).expect("entry for every term").frames()[j];
                let mut factors = vec![xi];
                factors.extend(std::iter::repeat(vj).take(term.k3));
                let prod = pointwise_product(&factors)?.resize(params.cutoff);
                acc.add_scaled(term.coefficient(), &prod)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    SpacetimeField::new(v.times().to_vec(), frames)
}

/// `Φ(v) = -I(P_N Σ c Ξ v^{k3})`, the Duhamel integral by the trapezoid rule
/// on the forcing grid.
pub fn phi(forcing: &ForcingFamily, v: &SpacetimeField<f64>) -> Result<SpacetimeField<f64>> {
    let f = remainder_nonlinearity(forcing, v)?;
    duhamel_trapezoid_grid(&f, forcing.params().alpha)?.map_frames(|g| g.scale(-1.0))
}

/// Picard iteration `v^0 = 0`, `v^{m+1} = Φ(v^m)`.
///
/// Failing to converge within `max_iter` iterations is reported, not raised.
pub fn picard_solve(forcing: &ForcingFamily, opts: PicardOptions) -> Result<(SpacetimeField<f64>, SolverReport)> {
    let s = forcing.params().sigma;
    let lattice = *forcing.lattice();
    let times = forcing.times().to_vec();
    let mut v = SpacetimeField::new(times.clone(), vec![SpectralField::zeros(lattice, true); times.len()])?;
    let mut report = SolverReport {
        iterate_norms: Vec::new(),
        increments: Vec::new(),
        contraction_ratios: Vec::new(),
        converged: false,
        final_residual: f64::NAN,
    };
    for _ in 0..opts.max_iter.max(1) {
        let next = phi(forcing, &v)?;
        let inc = ct_distance(&next, &v, s)?;
        report.iterate_norms.push(next.sup_sobolev(s));
        if let Some(&prev) = report.increments.last() {
            report.contraction_ratios.push(inc / prev);
        }
        report.increments.push(inc);
        v = next;
        if !inc.is_finite() {
            break;
        }
        if inc < opts.tol {
            report.converged = true;
            break;
        }
    }
    report.final_residual = ct_distance(&v, &phi(forcing, &v)?, s)?;
    Ok((v, report))
}
