use std::fmt::Debug;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::spectral::FreqVec;

/// A jointly Gaussian, mean-zero family of complex symbols.
pub trait GaussianFamily: Sync {
    type Symbol: Clone + Ord + Debug + Send + Sync;

    /// Hermitian covariance `E[a · conj b]`.
    fn cov(&self, a: &Self::Symbol, b: &Self::Symbol) -> Complex64;

    /// The symbol whose value is `conj a`.
    fn conj(&self, a: &Self::Symbol) -> Self::Symbol;

    /// Symbols of different classes are uncorrelated. An empty class means
    /// no such information.
    fn class(&self, _a: &Self::Symbol) -> Vec<i64> {
        Vec::new()
    }

    /// `E[a · b]`.
    fn bilinear(&self, a: &Self::Symbol, b: &Self::Symbol) -> Complex64 {
        self.cov(a, &self.conj(b))
    }
}

/// Finitely many symbols `0..m` with an explicit covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseFamily {
    cov: Vec<Vec<Complex64>>,
    conj: Vec<usize>,
}

impl DenseFamily {
    pub fn new(cov: Vec<Vec<Complex64>>, conj: Vec<usize>) -> Result<Self> {
        let m = cov.len();
        if conj.len() != m || cov.iter().any(|row| row.len() != m) {
            return Err(domain("covariance must be square and match the conjugation map"));
        }
        for a in 0..m {
            if conj[a] >= m || conj[conj[a]] != a {
                return Err(domain(format!("conjugation is not an involution at symbol {a}")));
            }
            for b in 0..m {
                let c = cov[a][b];
                if (c - cov[b][a].conj()).norm() > 1e-12 * (1.0 + c.norm()) {
                    return Err(domain(format!("covariance is not Hermitian at ({a}, {b})")));
                }
                if (cov[conj[a]][conj[b]] - c.conj()).norm() > 1e-12 * (1.0 + c.norm()) {
                    return Err(domain(format!("covariance is inconsistent with conjugation at ({a}, {b})")));
                }
            }
        }
        Ok(DenseFamily { cov, conj })
    }

    /// Real symbols with a symmetric covariance matrix.
    pub fn real(cov: Vec<Vec<f64>>) -> Result<Self> {
        let m = cov.len();
        let cov = cov
            .into_iter()
            .map(|row| row.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
            .collect();
        DenseFamily::new(cov, (0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.cov.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cov.is_empty()
    }
}

impl GaussianFamily for DenseFamily {
    type Symbol = usize;

    fn cov(&self, a: &usize, b: &usize) -> Complex64 {
        self.cov[*a][*b]
    }

    fn conj(&self, a: &usize) -> usize {
        self.conj[*a]
    }
}

/// Fourier coefficient `Ẑ(n, t_i)` of the random linear wave at one of a
/// fixed list of times.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WaveSymbol {
    pub n: FreqVec,
    pub time: usize,
}

impl WaveSymbol {
    pub fn new(n: impl Into<FreqVec>, time: usize) -> Self {
        WaveSymbol { n: n.into(), time }
    }
}

/// Covariance `E[Ẑ(n,s) conj Ẑ(m,t)] = δ_{nm} ⟨n⟩^{-2β} cos((s-t)⟨n⟩^α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFamily {
    beta: f64,
    alpha: f64,
    times: Vec<f64>,
}

impl WaveFamily {
    pub fn new(beta: f64, alpha: f64, times: Vec<f64>) -> Self {
        WaveFamily { beta, alpha, times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl GaussianFamily for WaveFamily {
    type Symbol = WaveSymbol;

    fn cov(&self, a: &WaveSymbol, b: &WaveSymbol) -> Complex64 {
        if a.n != b.n {
            return Complex64::new(0.0, 0.0);
        }
        let br = a.n.bracket();
        let dt = self.times[a.time] - self.times[b.time];
        Complex64::new(br.powf(-2.0 * self.beta) * (dt * br.powf(self.alpha)).cos(), 0.0)
    }

    fn conj(&self, a: &WaveSymbol) -> WaveSymbol {
        WaveSymbol {
            n: a.n.neg(),
            time: a.time,
        }
    }

    fn class(&self, a: &WaveSymbol) -> Vec<i64> {
        a.n.0.clone()
    }
}
