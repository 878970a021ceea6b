use crate::error::{domain, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussLegendre,
    Trapezoid,
}

/// An `M`-node rule on `[0, t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    kind: QuadratureKind,
    t: T,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn new(kind: QuadratureKind, m: usize, t: T) -> Result<Self> {
        if m < 2 {
            return Err(domain(format!("quadrature needs at least 2 nodes, got {m}")));
        }
        if !(t >= T::zero()) {
            return Err(domain(format!("quadrature interval [0, {t}] is empty")));
        }
        let tf = t.as_f64();
        let (nodes, weights): (Vec<f64>, Vec<f64>) = match kind {
            QuadratureKind::Trapezoid => {
                let h = tf / (m - 1) as f64;
                (0..m)
                    .map(|i| {
                        let w = if i == 0 || i == m - 1 { 0.5 * h } else { h };
                        (i as f64 * h, w)
                    })
                    .unzip()
            }
            QuadratureKind::GaussLegendre => gauss_legendre(m)
                .into_iter()
                .map(|(x, w)| (0.5 * tf * (x + 1.0), 0.5 * tf * w))
                .unzip(),
        };
        Ok(QuadratureRule {
            kind,
            t,
            nodes: nodes.into_iter().map(T::of).collect(),
            weights: weights.into_iter().map(T::of).collect(),
        })
    }

    pub fn trapezoid(m: usize, t: T) -> Result<Self> {
        Self::new(QuadratureKind::Trapezoid, m, t)
    }

    pub fn gauss_legendre(m: usize, t: T) -> Result<Self> {
        Self::new(QuadratureKind::GaussLegendre, m, t)
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn end(&self) -> T {
        self.t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            let pm1 = p0;
            dp = mf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[m - 1 - i] = (x, w);
    }
    out
}

/// Default node count: at least 16 and at least 8 nodes per period of the
/// fastest oscillation `ω_max` on `[0, t]`.
pub fn default_nodes(t: f64, omega_max: f64) -> usize {
    let per_period = 8.0 / std::f64::consts::TAU * t * omega_max;
    (per_period.ceil() as usize).max(16)
}
