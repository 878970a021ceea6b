use std::collections::BTreeMap;

use rayon::prelude::*;

use super::params::ParamSet;
use crate::error::{domain, Error, Result};
use crate::propagator::duhamel_trapezoid_grid;
use crate::spectral::{pointwise_product, Lattice, SpacetimeField, SpectralField};
use crate::stochastic::{sigma_n, wick_power, GaussianDraw, LinearSolution, WickSpec};

/// Margin below the critical regularity used by the `‖Ξ‖_Z` aggregate.
pub const NORM_EPSILON: f64 = 0.05;

/// `T j / steps` for `j = 0..=steps`.
pub fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|j| horizon * j as f64 / steps as f64).collect()
}

/// Sobolev index at which `Ξ_{k1,k2}` enters `‖Ξ‖_Z`: `k1(β - d/2) - ε`
/// for `k1 ≥ 1`, `k(β - d/2) + α - ε` for pure Duhamel powers, and 0 for the
/// constant entry.
pub fn forcing_index(params: &ParamSet, k1: usize, k2: usize) -> f64 {
    let gap = params.beta - params.d as f64 / 2.0;
    match (k1, k2) {
        (0, 0) => 0.0,
        (0, _) => params.k as f64 * gap + params.alpha - NORM_EPSILON,
        _ => k1 as f64 * gap - NORM_EPSILON,
    }
}

/// The stochastic objects `Ξ_{k1,k2} = :Z_N^{k1}: (P_N I(:Z_N^k:))^{k2}` for
/// `k1 ≤ k-1`, `k1 + k2 ≤ k`, sampled on a uniform time grid.
///
/// Entries live unprojected on the box of cutoff `kN`, so that products with
/// the remainder are exact before the final projection. The linear solution
/// `Z_N` and the Duhamel term `Y = P_N I(:Z_N^k:)` are kept on the box `N`.
#[derive(Clone, Debug)]
pub struct ForcingFamily {
    params: ParamSet,
    entries: BTreeMap<(usize, usize), SpacetimeField<f64>>,
    linear: SpacetimeField<f64>,
    duhamel_term: SpacetimeField<f64>,
    norm_z: f64,
}

impl ForcingFamily {
    /// A family whose entries are all zero (the forcing switched off).
    pub fn zeros(params: &ParamSet, steps: usize) -> Result<Self> {
        params.validate()?;
        let lattice = params.lattice()?;
        let times = uniform_grid(params.horizon, steps.max(1));
        let field = |lat: Lattice| {
            SpacetimeField::new(times.clone(), vec![SpectralField::zeros(lat, true); times.len()])
        };
        let big = lattice.with_cutoff(params.k * params.cutoff);
        let mut entries = BTreeMap::new();
        for (k1, k2) in entry_keys(params.k) {
            entries.insert((k1, k2), field(big)?);
        }
        Ok(ForcingFamily {
            params: params.clone(),
            entries,
            linear: field(lattice)?,
            duhamel_term: field(lattice)?,
            norm_z: 0.0,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        self.linear.times()
    }

    /// Lattice of the remainder (cutoff `N`).
    pub fn lattice(&self) -> &Lattice {
        self.linear.lattice()
    }

    pub fn get(&self, k1: usize, k2: usize) -> Option<&SpacetimeField<f64>> {
        self.entries.get(&(k1, k2))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &SpacetimeField<f64>)> {
        self.entries.iter()
    }

    /// `Z_N` on the grid.
    pub fn linear(&self) -> &SpacetimeField<f64> {
        &self.linear
    }

    /// `P_N I(:Z_N^k:)` on the grid.
    pub fn duhamel_term(&self) -> &SpacetimeField<f64> {
        &self.duhamel_term
    }

    /// `Σ_{k1,k2} max_t ‖Ξ_{k1,k2}(t)‖_{H^{s(k1,k2)}}` with the indices of
    /// [`forcing_index`].
    pub fn norm_z(&self) -> f64 {
        self.norm_z
    }
}

fn entry_keys(k: usize) -> Vec<(usize, usize)> {
    let mut keys = Vec::new();
    for k1 in 0..k {
        for k2 in 0..=(k - k1) {
            keys.push((k1, k2));
        }
    }
    keys
}

/// Samples the realization for `params.seed` and builds the family on a grid
/// of `steps` uniform steps.
pub fn build_forcing(params: &ParamSet, steps: usize) -> Result<ForcingFamily> {
    params.validate()?;
    let draw = GaussianDraw::sample(params.lattice()?, params.seed);
    build_forcing_with(params, &draw, steps)
}

/// [`build_forcing`] for a given draw on the box of cutoff `params.cutoff`.
pub fn build_forcing_with(params: &ParamSet, draw: &GaussianDraw<f64>, steps: usize) -> Result<ForcingFamily> {
    params.validate()?;
    let lattice = params.lattice()?;
    if *draw.lattice() != lattice {
        return Err(Error::Dimension(format!(
            "draw on cutoff {} for parameters with cutoff {}",
            draw.lattice().cutoff(),
            params.cutoff
        )));
    }
    if steps == 0 {
        return Err(domain("the time grid needs at least one step"));
    }
    let k = params.k;
    let times = uniform_grid(params.horizon, steps);
    let lin = LinearSolution::new(draw.clone(), params.beta, params.alpha);
    let sigma = sigma_n(&lattice, params.beta);

    // Wick powers :Z^l: for l = 1..=k at every grid time.
    let wick: Vec<Vec<SpectralField<f64>>> = times
        .par_iter()
        .map(|&t| {
            let z = lin.at(t);
            (1..=k)
                .map(|l| wick_power(&z, WickSpec::new(l, sigma)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let linear = SpacetimeField::new(times.clone(), wick.iter().map(|w| w[0].clone()).collect())?;
    let top = SpacetimeField::new(times.clone(), wick.iter().map(|w| w[k - 1].resize(params.cutoff)).collect())?;
    let duhamel_term = duhamel_trapezoid_grid(&top, params.alpha)?;

    let big = lattice.with_cutoff(k * params.cutoff);
    let mut entries = BTreeMap::new();
    let mut norm_z = 0.0;
    for (k1, k2) in entry_keys(k) {
        let frames: Vec<SpectralField<f64>> = (0..times.len())
            .into_par_iter()
            .map(|j| {
                let y = &duhamel_term.frames()[j];
                let mut factors: Vec<&SpectralField<f64>> = Vec::with_capacity(k2 + 1);
                if k1 > 0 {
                    factors.push(&wick[j][k1 - 1]);
                }
                factors.extend(std::iter::repeat(y).take(k2));
                if factors.is_empty() {
                    return Ok(SpectralField::constant(big, 1.0));
                }
                Ok(pointwise_product(&factors)?.resize(big.cutoff()))
            })
            .collect::<Result<_>>()?;
        let field = SpacetimeField::new(times.clone(), frames)?;
        norm_z += field.sup_sobolev(forcing_index(params, k1, k2));
        entries.insert((k1, k2), field);
    }
    Ok(ForcingFamily {
        params: params.clone(),
        entries,
        linear,
        duhamel_term,
        norm_z,
    })
}
