use crate::error::{domain, Result};
use crate::propagator::{default_nodes, duhamel_with, QuadratureRule};
use crate::solver::ParamSet;
use crate::spectral::{bracket, pointwise_product, Lattice, SpectralField};
use crate::stochastic::{sigma_n, wick_power, LinearSolution, WickSpec};

/// The random objects whose Fourier moments are studied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectKind {
    /// The random linear solution `Z_N`.
    Z,
    /// `:Z_N^ℓ:`
    WickPower(usize),
    /// `I(:Z_N^k:)` for the given `k`.
    DuhamelWick(usize),
    /// `:Z_N^{k1}: (I(:Z_N^k:))^{k2}` with `k` from the parameter set.
    Product { k1: usize, k2: usize },
}

/// An object together with its parameters and evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSpec {
    pub kind: ObjectKind,
    pub params: ParamSet,
    pub time: f64,
}

impl ObjectSpec {
    pub fn new(kind: ObjectKind, params: ParamSet, time: f64) -> Result<Self> {
        let spec = ObjectSpec { kind, params, time };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.lattice()?;
        if !(self.params.alpha > 0.0) || !self.params.beta.is_finite() {
            return Err(domain("alpha must be positive and beta finite"));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(domain(format!("time {} must be finite and nonnegative", self.time)));
        }
        match self.kind {
            ObjectKind::WickPower(0) => Err(domain("Wick power must be at least 1")),
            ObjectKind::DuhamelWick(0) => Err(domain("Duhamel object needs k >= 1")),
            ObjectKind::Product { k1, k2 } if k1 + 1 > self.params.k || k2 > self.params.k => Err(domain(format!(
                "product needs k1 <= k-1 and k2 <= k, got k1 = {k1}, k2 = {k2}, k = {}",
                self.params.k
            ))),
            _ => Ok(()),
        }
    }

    pub fn at_time(&self, time: f64) -> ObjectSpec {
        ObjectSpec {
            time,
            ..self.clone()
        }
    }

    /// Chaos order of the object.
    pub fn order(&self) -> usize {
        match self.kind {
            ObjectKind::Z => 1,
            ObjectKind::WickPower(l) | ObjectKind::DuhamelWick(l) => l,
            ObjectKind::Product { k1, k2 } => k1 + k2 * self.params.k,
        }
    }

    /// Cutoff of the box carrying the object's coefficients.
    pub fn output_cutoff(&self) -> usize {
        self.order().max(1) * self.params.cutoff
    }

    pub fn output_lattice(&self) -> Result<Lattice> {
        Lattice::new(self.params.d, self.output_cutoff())
    }

    /// Evaluates the object on one realization.
    pub fn realize(&self, lin: &LinearSolution<f64>) -> Result<SpectralField<f64>> {
        let p = &self.params;
        let sigma = sigma_n(lin.lattice(), p.beta);
        let wick = |ell: usize, t: f64| wick_power(&lin.at(t), WickSpec::new(ell, sigma)?);
        match self.kind {
            ObjectKind::Z => Ok(lin.at(self.time)),
            ObjectKind::WickPower(l) => wick(l, self.time),
            ObjectKind::DuhamelWick(k) => duhamel_wick(lin, k, sigma, p.alpha, self.time),
            ObjectKind::Product { k1, k2 } => {
                let mut factors = Vec::new();
                if k1 > 0 {
                    factors.push(wick(k1, self.time)?);
                }
                if k2 > 0 {
                    let dw = duhamel_wick(lin, p.k, sigma, p.alpha, self.time)?;
                    factors.extend(std::iter::repeat_n(dw, k2));
                }
                if factors.is_empty() {
                    return Ok(SpectralField::constant(*lin.lattice(), 1.0));
                }
                let refs: Vec<&SpectralField<f64>> = factors.iter().collect();
                pointwise_product(&refs)
            }
        }
    }
}

/// Gauss–Legendre rule for a Duhamel integral over `[0, t]` whose integrand
/// lives on the box of cutoff `cutoff`.
pub fn duhamel_rule(t: f64, cutoff: usize, d: usize, alpha: f64) -> Result<QuadratureRule<f64>> {
    let corner = vec![cutoff as i64; d];
    QuadratureRule::gauss_legendre(default_nodes(t, bracket(&corner).powf(alpha)), t)
}

/// `I(:Z^k:)(t)` on the box of cutoff `kN`.
pub fn duhamel_wick(lin: &LinearSolution<f64>, k: usize, sigma: f64, alpha: f64, t: f64) -> Result<SpectralField<f64>> {
    let lat = lin.lattice().with_cutoff(k * lin.lattice().cutoff());
    if t == 0.0 {
        return Ok(SpectralField::zeros(lat, true));
    }
    let rule = duhamel_rule(t, lat.cutoff(), lat.dim(), alpha)?;
    let spec = WickSpec::new(k, sigma)?;
    duhamel_with(lat, t, alpha, &rule, |tau| wick_power(&lin.at(tau), spec))
}
