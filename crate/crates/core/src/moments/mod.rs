//! Second moments of Fourier coefficients: exact oracles, Monte Carlo
//! estimators, power-law fits and the product inequality and orthogonality
//! checks.

mod exact;
mod fit;
mod mc;
mod object;
mod product;
mod table;

pub use exact::{
    all_modes, axis_modes, delta_z_moment, duhamel_kernel, exact_duhamel_moment, exact_table, exact_wick_moment,
    exact_wick_moments,
};
pub use fit::{
    default_shell_range, fit_exponent, fit_increment, regularity_report, weighted_line, ExponentFit, RegularityReport,
    TimeFit,
};
pub use mc::{delta_moment, mc_moment, BATCH};
pub use object::{duhamel_rule, duhamel_wick, ObjectKind, ObjectSpec};
pub use product::{
    chaos_decomposition_check, product_bound_check, DecompositionReport, Factor, ProductExpansion, ProductMethod,
    ProductReport, ProductRow, MAX_EXACT_CUTOFF, MAX_EXACT_ORDER,
};
pub use table::{shell_center, shell_indices, shell_of, Accumulator, MomentEntry, MomentTable, Target};
