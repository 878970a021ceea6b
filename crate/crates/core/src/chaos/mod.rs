//! Exact Wiener-chaos combinatorics over finite Gaussian families: pairings,
//! Isserlis expectations, Wick decompositions and chaos covariances.

mod engine;
mod family;
mod pairing;

pub use engine::{
    chaos_covariance, hyper_check, isserlis, permanent, second_moment, wick_decompose, wick_decompose_sum,
    WickComponent, WickTerm,
};
pub use family::{DenseFamily, GaussianFamily, WaveFamily, WaveSymbol};
pub use pairing::{enumerate_pairings, pairing_count, Pairing, Partition};
