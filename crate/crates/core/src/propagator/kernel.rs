use crate::spectral::bracket_in;
use crate::Scalar;

/// Duhamel symbol `S_n(t) = sin(t⟨n⟩^α) / ⟨n⟩^α`.
pub fn wave_kernel<T: Scalar>(n: &[i64], t: T, alpha: T) -> T {
    let w = bracket_in::<T>(n).powf(alpha);
    (t * w).sin() / w
}

/// Companion symbol `cos(t⟨n⟩^α)` of the linear evolution.
pub fn cos_kernel<T: Scalar>(n: &[i64], t: T, alpha: T) -> T {
    (t * bracket_in::<T>(n).powf(alpha)).cos()
}

/// `E[𝔤_n(t_1) conj 𝔤_n(t_2)] = cos((t_1 - t_2)⟨n⟩^α)` for
/// `𝔤_n(t) = cos(t⟨n⟩^α) g_n + sin(t⟨n⟩^α) h_n` with unit-variance draws.
pub fn g_covariance<T: Scalar>(n: &[i64], t1: T, t2: T, alpha: T) -> T {
    cos_kernel(n, t1 - t2, alpha)
}
