use std::io::Write;

use rayon::prelude::*;

use super::forcing::{build_forcing_with, ForcingFamily};
use super::params::ParamSet;
use super::picard::{picard_solve, PicardOptions, SolverReport};
use super::truncated::{default_steps, solve_truncated_with, TruncatedOptions};
use crate::error::{domain, Result};
use crate::spectral::{SpacetimeField, SpectralField};
use crate::stochastic::{GaussianDraw, LinearSolution};

/// Which parts of the dynamics are switched on in a decomposition run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dynamics {
    /// The renormalized equation and the full forcing family.
    Full,
    /// Linear flow with the forcing switched off, so `u_N = Z_N`.
    Linear,
}

/// `‖u_N(t_j) - (Z_N - P_N I(:Z_N^k:) + v_N)(t_j)‖_{H^σ}` at every grid time
/// of a `steps`-step run.
pub fn decomposition_residuals(params: &ParamSet, steps: usize, dynamics: Dynamics, picard: PicardOptions) -> Result<Vec<f64>> {
    params.validate()?;
    let draw = GaussianDraw::sample(params.lattice()?, params.seed);
    let nonlinear = dynamics == Dynamics::Full;
    let u = solve_truncated_with(params, &draw, TruncatedOptions { steps, nonlinear })?.u;
    let forcing = match dynamics {
        Dynamics::Full => build_forcing_with(params, &draw, steps)?,
        Dynamics::Linear => ForcingFamily::zeros(params, steps)?,
    };
    let (v, _) = picard_solve(&forcing, picard)?;
    let z = LinearSolution::new(draw, params.beta, params.alpha);
    let y = forcing.duhamel_term();
    u.times()
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut r = (&u.frames()[j] - &z.at(t))?;
            r.add_scaled(1.0, &y.frames()[j])?;
            r.add_scaled(-1.0, &v.frames()[j])?;
            Ok(r.sobolev_norm(params.sigma))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionOptions {
    /// Steps of the coarsest level; each level doubles them.
    pub base_steps: usize,
    pub levels: usize,
    pub picard: PicardOptions,
}

impl DecompositionOptions {
    pub fn for_params(params: &ParamSet) -> Result<Self> {
        Ok(DecompositionOptions {
            base_steps: default_steps(params)?,
            levels: 4,
            picard: PicardOptions { tol: 1e-12, max_iter: 50 },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub steps: usize,
    /// Discrete `C_T H^σ` residual.
    pub residual: f64,
    /// Previous level's residual over this one.
    pub reduction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionStudy {
    pub rows: Vec<RefinementRow>,
}

impl DecompositionStudy {
    /// Smallest reduction factor between successive levels.
    pub fn min_reduction(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.reduction).reduce(f64::min)
    }
}

/// Residual of the second-order decomposition under simultaneous refinement
/// of the integrator step and the Duhamel quadrature.
pub fn decomposition_check(params: &ParamSet, opts: DecompositionOptions) -> Result<DecompositionStudy> {
    if opts.base_steps == 0 || opts.levels == 0 {
        return Err(domain("a refinement study needs at least one level of at least one step"));
    }
    let residuals = (0..opts.levels)
        .into_par_iter()
        .map(|l| {
            let steps = opts.base_steps << l;
            let r = decomposition_residuals(params, steps, Dynamics::Full, opts.picard)?;
            Ok((steps, r.into_iter().fold(0.0, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(residuals.len());
    for (steps, residual) in residuals {
        let reduction = rows.last().map(|p| p.residual / residual);
        rows.push(RefinementRow {
            steps,
            residual,
            reduction,
        });
    }
    Ok(DecompositionStudy { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// The smaller cutoff of the compared pair.
    pub n: usize,
    /// The larger cutoff.
    pub next: usize,
    /// `‖v_next - v_n‖` in discrete `C_T H^σ`.
    pub diff_norm: f64,
    /// `log(previous diff / diff) / log(next / n)`.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub steps: usize,
    /// Picard reports per cutoff.
    pub solves: Vec<(usize, SolverReport)>,
    /// `σ` lies outside the admissible window (or the set is rejected).
    pub outside_window: bool,
    /// Differences never increase along the ladder.
    pub monotone: bool,
    /// Differences strictly decrease along the ladder.
    pub strictly_decreasing: bool,
    /// Mean of the fitted rates.
    pub gamma_hat: Option<f64>,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.solves.iter().all(|(_, r)| r.converged)
    }

    pub fn flag(&self) -> Option<&'static str> {
        self.outside_window.then_some("outside admissible window")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["N", "diff_norm", "rate"])?;
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                r.diff_norm.to_string(),
                r.rate.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOptions {
    /// Grid steps shared by every cutoff; `None` takes the default for the
    /// largest cutoff.
    pub steps: Option<usize>,
    pub picard: PicardOptions,
    /// Solve every rung with the data truncated to the first cutoff; the
    /// differences must then vanish.
    pub control: bool,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            steps: None,
            picard: PicardOptions::default(),
            control: false,
        }
    }
}

/// `‖v_{N'} - v_N‖` along an increasing ladder of cutoffs, with draws nested
/// across the ladder (the same `g_n, h_n` for every `N ≥ |n|`).
pub fn convergence_study(params: &ParamSet, n_list: &[usize], opts: ConvergenceOptions) -> Result<ConvergenceReport> {
    params.validate()?;
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(domain(format!("cutoff ladder {n_list:?} must be increasing with at least two positive entries")));
    }
    let top = *n_list.last().expect("nonempty");
    let steps = match opts.steps {
        Some(s) => s,
        None => default_steps(&ParamSet {
            cutoff: top,
            ..params.clone()
        })?,
    };
    let base = n_list[0];
    let solves = n_list
        .par_iter()
        .map(|&n| {
            let p = ParamSet {
                cutoff: n,
                ..params.clone()
            };
            let draw = GaussianDraw::sample(p.lattice()?, p.seed);
            let (v, rep) = if opts.control {
                let q = ParamSet {
                    cutoff: base,
                    ..params.clone()
                };
                let forcing = build_forcing_with(&q, &draw.resize(base), steps)?;
                let (v, rep) = picard_solve(&forcing, opts.picard)?;
                (v.map_frames(|f| f.resize(n))?, rep)
            } else {
                let forcing = build_forcing_with(&p, &draw, steps)?;
                picard_solve(&forcing, opts.picard)?
            };
            Ok((n, v, rep))
        })
        .collect::<Result<Vec<(usize, SpacetimeField<f64>, SolverReport)>>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for w in solves.windows(2) {
        let (n, ref small, _) = w[0];
        let (next, ref large, _) = w[1];
        let diff_norm = small
            .frames()
            .iter()
            .zip(large.frames())
            .map(|(a, b): (&SpectralField<f64>, _)| Ok((&a.resize(next) - b)?.sobolev_norm(params.sigma)))
            .try_fold(0.0, |m, r: Result<f64>| Ok::<_, crate::Error>(f64::max(m, r?)))?;
        let rate = rows
            .last()
            .filter(|p| p.diff_norm > 0.0 && diff_norm > 0.0)
            .map(|p| (p.diff_norm / diff_norm).ln() / (next as f64 / n as f64).ln());
        rows.push(ConvergenceRow {
            n,
            next,
            diff_norm,
            rate,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].diff_norm <= w[0].diff_norm);
    let strictly_decreasing = rows.windows(2).all(|w| w[1].diff_norm < w[0].diff_norm);
    let rates: Vec<f64> = rows.iter().filter_map(|r| r.rate).collect();
    let gamma_hat = (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64);
    let outside_window = !params
        .admissibility()
        .window()
        .is_some_and(|w| w.contains(params.sigma));
    Ok(ConvergenceReport {
        rows,
        steps,
        solves: solves.into_iter().map(|(n, _, r)| (n, r)).collect(),
        outside_window,
        monotone,
        strictly_decreasing,
        gamma_hat,
    })
}
