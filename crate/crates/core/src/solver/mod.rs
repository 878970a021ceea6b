//! Parameter admissibility, the stochastic forcing family, the Picard
//! solver for the remainder equation, the truncated solver and convergence
//! studies.

mod forcing;
mod params;
mod picard;
mod study;
mod truncated;

pub use forcing::{build_forcing, build_forcing_with, forcing_index, uniform_grid, ForcingFamily, NORM_EPSILON};
pub use params::{admissible_params, fmt_num, Admissibility, Condition, ParamSet, SigmaWindow, Violation};
pub use picard::{
    ct_distance, multinomial, phi, picard_solve, remainder_nonlinearity, remainder_terms, PicardOptions, RemainderTerm,
    SolverReport,
};
pub use study::{
    convergence_study, decomposition_check, decomposition_residuals, ConvergenceOptions, ConvergenceReport, ConvergenceRow,
    DecompositionOptions, DecompositionStudy, Dynamics, RefinementRow,
};
pub use truncated::{default_steps, solve_truncated, solve_truncated_with, TruncatedOptions, TruncatedSolution, GROWTH_LIMIT};
