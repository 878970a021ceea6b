use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::exact::{delta_z_moment, exact_duhamel_moment, exact_wick_moments};
use super::mc::mc_moment;
use super::object::{duhamel_rule, ObjectKind, ObjectSpec};
use super::table::Target;
use crate::chaos::{chaos_covariance, second_moment, wick_decompose_sum, Partition, WaveFamily, WaveSymbol, WickComponent, WickTerm};
use crate::error::{domain, Error, Result};
use crate::propagator::{wave_kernel, QuadratureRule};
use crate::solver::ParamSet;
use crate::spectral::{FreqVec, Lattice};

/// One factor of a product of Gaussian functionals of `Z_N`, all evaluated
/// at a common time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    /// `:Z^ℓ:(t)`; `Wick(1)` is `Z(t)`.
    Wick(usize),
    /// `I(:Z^k:)(t)`
    Duhamel(usize),
    /// `δ_h Z(t) = Z(t+h) - Z(t)`
    DeltaZ(f64),
}

impl Factor {
    pub fn order(&self) -> usize {
        match *self {
            Factor::Wick(l) | Factor::Duhamel(l) => l,
            Factor::DeltaZ(_) => 1,
        }
    }

    /// The factors of a product object.
    pub fn of_object(spec: &ObjectSpec) -> Vec<Factor> {
        match spec.kind {
            ObjectKind::Z => vec![Factor::Wick(1)],
            ObjectKind::WickPower(l) => vec![Factor::Wick(l)],
            ObjectKind::DuhamelWick(k) => vec![Factor::Duhamel(k)],
            ObjectKind::Product { k1, k2 } => {
                let mut f = Vec::new();
                if k1 > 0 {
                    f.push(Factor::Wick(k1));
                }
                f.extend(std::iter::repeat_n(Factor::Duhamel(spec.params.k), k2));
                f
            }
        }
    }
}

/// Symbolic form of `F̂(n) = (Π_j F_j)^(n)` as a weighted sum of products of
/// Wick-ordered blocks of wave symbols.
pub struct ProductExpansion {
    pub family: WaveFamily,
    pub partition: Partition,
    pub terms: Vec<(Complex64, Vec<WaveSymbol>)>,
    pub rule: Option<QuadratureRule<f64>>,
}

impl ProductExpansion {
    /// Builds the expansion at frequency `n`. Duhamel factors use a
    /// Gauss–Legendre rule on `[0, t]`; equal Wick monomials are merged.
    pub fn new(factors: &[Factor], lattice: &Lattice, beta: f64, alpha: f64, t: f64, n: &[i64]) -> Result<Self> {
        if factors.is_empty() {
            return Err(domain("a product needs at least one factor"));
        }
        if n.len() != lattice.dim() {
            return Err(Error::Dimension(format!("frequency {n:?} in a d = {} lattice", lattice.dim())));
        }
        let mut times = vec![t];
        let max_duhamel = factors
            .iter()
            .filter_map(|f| if let Factor::Duhamel(k) = f { Some(*k) } else { None })
            .max();
        let rule = match max_duhamel {
            Some(k) if t > 0.0 => Some(duhamel_rule(t, k * lattice.cutoff(), lattice.dim(), alpha)?),
            _ => None,
        };
        let node_offset = times.len();
        if let Some(r) = &rule {
            times.extend_from_slice(r.nodes());
        }
        let mut delta_time = Vec::with_capacity(factors.len());
        for f in factors {
            if let Factor::DeltaZ(h) = *f {
                if !(t + h >= 0.0) {
                    return Err(domain(format!("t + h = {} is negative", t + h)));
                }
                delta_time.push(times.len());
                times.push(t + h);
            } else {
                delta_time.push(usize::MAX);
            }
        }
        let family = WaveFamily::new(beta, alpha, times);
        let sizes: Vec<usize> = factors.iter().map(Factor::order).collect();
        let partition = Partition::contiguous(&sizes);
        let k = partition.size();

        // All k-tuples of box frequencies summing to n.
        let d = lattice.dim();
        let mut merged: BTreeMap<Vec<WaveSymbol>, Complex64> = BTreeMap::new();
        let mut idx = vec![0usize; k.saturating_sub(1)];
        let mut freqs = vec![vec![0i64; d]; k];
        'tuples: loop {
            let mut last = n.to_vec();
            for (slot, &i) in idx.iter().enumerate() {
                lattice.write_freq(i, &mut freqs[slot]);
                for (l, f) in last.iter_mut().zip(&freqs[slot]) {
                    *l -= f;
                }
            }
            if lattice.contains(&last) {
                freqs[k - 1] = last;
                // per factor: alternatives (weight, time index)
                let mut alts: Vec<Vec<(f64, usize)>> = Vec::with_capacity(factors.len());
                let mut start = 0;
                for (j, f) in factors.iter().enumerate() {
                    let size = sizes[j];
                    let m: Vec<i64> = (0..d).map(|c| freqs[start..start + size].iter().map(|v| v[c]).sum()).collect();
                    alts.push(match *f {
                        Factor::Wick(_) => vec![(1.0, 0)],
                        Factor::Duhamel(_) => match &rule {
                            None => Vec::new(),
                            Some(r) => r
                                .nodes()
                                .iter()
                                .zip(r.weights())
                                .enumerate()
                                .map(|(q, (&tau, &w))| (w * wave_kernel(&m, t - tau, alpha), node_offset + q))
                                .collect(),
                        },
                        Factor::DeltaZ(_) => vec![(1.0, delta_time[j]), (-1.0, 0)],
                    });
                    start += size;
                }
                let mut choice = vec![0usize; factors.len()];
                'alts: loop {
                    if alts.iter().all(|a| !a.is_empty()) {
                        let mut weight = 1.0;
                        let mut key = Vec::with_capacity(k);
                        let mut start = 0;
                        for (j, a) in alts.iter().enumerate() {
                            let (w, time) = a[choice[j]];
                            weight *= w;
                            let mut block: Vec<WaveSymbol> = freqs[start..start + sizes[j]]
                                .iter()
                                .map(|f| WaveSymbol::new(FreqVec(f.clone()), time))
                                .collect();
                            block.sort_unstable();
                            key.extend(block);
                            start += sizes[j];
                        }
                        *merged.entry(key).or_insert(Complex64::new(0.0, 0.0)) += weight;
                    } else {
                        break 'alts;
                    }
                    for (j, c) in choice.iter_mut().enumerate() {
                        *c += 1;
                        if *c < alts[j].len() {
                            continue 'alts;
                        }
                        *c = 0;
                    }
                    break;
                }
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < lattice.len() {
                    continue 'tuples;
                }
                *slot = 0;
            }
            break;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, w)| *w != Complex64::new(0.0, 0.0))
            .map(|(s, w)| (w, s))
            .collect();
        Ok(ProductExpansion {
            family,
            partition,
            terms,
            rule,
        })
    }

    /// Top chaos component: the product with every block merged into one
    /// Wick product.
    pub fn top(&self) -> WickComponent<WaveSymbol> {
        let terms = self
            .terms
            .iter()
            .map(|(w, s)| WickTerm {
                weight: *w,
                factors: s.clone(),
            })
            .collect();
        WickComponent::new(self.partition.size(), terms).expect("all terms have full degree")
    }
}

/// Exact `E|F̂_j(m)|²` tables of single factors on the box of cutoff
/// `order · N`.
fn factor_moments(
    f: Factor,
    lattice: &Lattice,
    beta: f64,
    alpha: f64,
    t: f64,
    rule: Option<&QuadratureRule<f64>>,
) -> Result<(Lattice, Vec<f64>)> {
    match f {
        Factor::Wick(l) => {
            let m = exact_wick_moments(l, lattice, beta)?;
            Ok((*m.lattice(), m.coeffs().iter().map(|c| c.re).collect()))
        }
        Factor::Duhamel(k) => {
            let out = lattice.with_cutoff(k * lattice.cutoff());
            let vals: Result<Vec<f64>> = (0..out.len())
                .into_par_iter()
                .map(|i| exact_duhamel_moment(k, lattice, beta, alpha, t, &out.freq(i).0, rule))
                .collect();
            Ok((out, vals?))
        }
        Factor::DeltaZ(h) => Ok((*lattice, lattice.iter().map(|n| delta_z_moment(&n.0, beta, alpha, h)).collect())),
    }
}

fn convolve(a: (&Lattice, &[f64]), b: (&Lattice, &[f64])) -> (Lattice, Vec<f64>) {
    let out = a.0.with_cutoff(a.0.cutoff() + b.0.cutoff());
    let mut v = vec![0.0; out.len()];
    let fb: Vec<FreqVec> = b.0.iter().collect();
    for (i, fa) in a.0.iter().enumerate() {
        if a.1[i] == 0.0 {
            continue;
        }
        for (j, f) in fb.iter().enumerate() {
            let s: Vec<i64> = fa.0.iter().zip(&f.0).map(|(x, y)| x + y).collect();
            v[out.index(&s).expect("sum lies in the output box")] += a.1[i] * b.1[j];
        }
    }
    (out, v)
}

/// One row of a product bound check.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRow {
    pub n: FreqVec,
    pub lhs: f64,
    /// Standard error of `lhs` (zero for exact evaluation).
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductReport {
    pub rows: Vec<ProductRow>,
    pub sup: f64,
    pub inf: f64,
}

impl ProductReport {
    fn from_rows(rows: Vec<ProductRow>) -> Result<Self> {
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        if ratios.is_empty() {
            return Err(Error::InsufficientData("no target with a nonzero bound".into()));
        }
        Ok(ProductReport {
            sup: ratios.iter().cloned().fold(f64::MIN, f64::max),
            inf: ratios.iter().cloned().fold(f64::MAX, f64::min),
            rows,
        })
    }

    /// `sup / inf - 1`: how far the ratio is from constant in `n`.
    pub fn spread(&self) -> f64 {
        self.sup / self.inf - 1.0
    }
}

/// How the left side of a product bound is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMethod {
    /// Exact chaos computation; any factors, small boxes.
    Exact,
    /// Monte Carlo; same-time Wick factors only, whose top chaos is
    /// `:Z^{Σℓ}:`.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Compares `E|π_K F̂(n)|²` (top chaos of the product) with
/// `Σ_{n = n_1 + … + n_J} Π_j E|F̂_j(n_j)|²` for each target `n`.
pub fn product_bound_check(
    factors: &[Factor],
    params: &ParamSet,
    t: f64,
    targets: &[FreqVec],
    method: ProductMethod,
) -> Result<ProductReport> {
    let lattice = params.lattice()?;
    let (beta, alpha) = (params.beta, params.alpha);
    if factors.is_empty() {
        return Err(domain("a product needs at least one factor"));
    }
    let kmax = factors
        .iter()
        .filter_map(|f| if let Factor::Duhamel(k) = f { Some(*k) } else { None })
        .max();
    let rule = match kmax {
        Some(k) if t > 0.0 => Some(duhamel_rule(t, k * lattice.cutoff(), lattice.dim(), alpha)?),
        _ => None,
    };
    let tables: Result<Vec<(Lattice, Vec<f64>)>> = factors
        .iter()
        .map(|&f| factor_moments(f, &lattice, beta, alpha, t, rule.as_ref()))
        .collect();
    let tables = tables?;
    let mut rhs = tables[0].clone();
    for tb in &tables[1..] {
        rhs = convolve((&rhs.0, &rhs.1), (&tb.0, &tb.1));
    }
    let rhs_at = |n: &FreqVec| rhs.0.index(&n.0).map(|i| rhs.1[i]).unwrap_or(0.0);
    let lhs: Vec<(f64, f64)> = match method {
        ProductMethod::Exact => {
            let vals: Result<Vec<(f64, f64)>> = targets
                .par_iter()
                .map(|n| {
                    let ex = ProductExpansion::new(factors, &lattice, beta, alpha, t, &n.0)?;
                    let top = ex.top();
                    Ok((chaos_covariance(&ex.family, &top, &top).re, 0.0))
                })
                .collect();
            vals?
        }
        ProductMethod::MonteCarlo { samples, seed } => {
            let mut total = 0;
            for f in factors {
                match f {
                    Factor::Wick(l) => total += l,
                    _ => {
                        return Err(Error::Unsupported(
                            "Monte Carlo product checks take same-time Wick factors only".into(),
                        ))
                    }
                }
            }
            let spec = ObjectSpec::new(ObjectKind::WickPower(total), params.clone(), t)?;
            let ts: Vec<Target> = targets.iter().cloned().map(Target::Mode).collect();
            let table = mc_moment(&spec, &ts, samples, seed)?;
            table.entries().iter().map(|e| (e.estimate, e.stderr)).collect()
        }
    };
    let rows = targets
        .iter()
        .zip(lhs)
        .filter_map(|(n, (l, se))| {
            let r = rhs_at(n);
            (r > 0.0).then(|| ProductRow {
                n: n.clone(),
                lhs: l,
                lhs_stderr: se,
                rhs: r,
                ratio: l / r,
            })
        })
        .collect();
    ProductReport::from_rows(rows)
}

/// Full second moment against the sum of its chaos projections.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub full: f64,
    /// `(order, E|π_order F̂|²)` for every component.
    pub components: Vec<(usize, f64)>,
    pub residual: f64,
}

impl DecompositionReport {
    /// Residual relative to the full second moment.
    pub fn relative_residual(&self) -> f64 {
        if self.full == 0.0 {
            self.residual
        } else {
            self.residual / self.full.abs()
        }
    }
}

/// Largest total chaos order handled exactly.
pub const MAX_EXACT_ORDER: usize = 6;
/// Largest cutoff handled exactly.
pub const MAX_EXACT_CUTOFF: usize = 4;

/// `|E|F̂(n)|² - Σ_ℓ E|π_{K-2ℓ} F̂(n)|²|` for a product of factors, computed
/// exactly.
pub fn chaos_decomposition_check(
    factors: &[Factor],
    params: &ParamSet,
    t: f64,
    n: &[i64],
) -> Result<DecompositionReport> {
    let total: usize = factors.iter().map(Factor::order).sum();
    if total > MAX_EXACT_ORDER || params.cutoff > MAX_EXACT_CUTOFF || params.d != 1 {
        return Err(Error::Unsupported(format!(
            "exact decomposition needs d = 1, N <= {MAX_EXACT_CUTOFF} and total order <= {MAX_EXACT_ORDER}"
        )));
    }
    let lattice = params.lattice()?;
    let ex = ProductExpansion::new(factors, &lattice, params.beta, params.alpha, t, n)?;
    let full = second_moment(&ex.family, &ex.terms, &ex.partition)?;
    let comps = wick_decompose_sum(&ex.family, &ex.terms, &ex.partition)?;
    let components: Vec<(usize, f64)> = comps
        .iter()
        .map(|c| (c.order(), chaos_covariance(&ex.family, c, c).re))
        .collect();
    let sum: f64 = components.iter().map(|c| c.1).sum();
    Ok(DecompositionReport {
        full,
        residual: (full - sum).abs(),
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> ParamSet {
        ParamSet {
            cutoff: n,
            ..ParamSet::default()
        }
    }

    fn targets(max: i64) -> Vec<FreqVec> {
        (-max..=max).map(|m| FreqVec(vec![m])).collect()
    }

    #[test]
    fn single_factor_ratio_is_one() {
        let r = product_bound_check(&[Factor::Wick(1)], &params(6), 0.2, &targets(6), ProductMethod::Exact).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-12 && (r.inf - 1.0).abs() < 1e-12);
        let r = product_bound_check(&[Factor::Wick(2)], &params(4), 0.2, &targets(8), ProductMethod::Exact).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-10 && (r.inf - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_linear_factors_give_two() {
        let r = product_bound_check(
            &[Factor::Wick(1), Factor::Wick(1)],
            &params(8),
            0.4,
            &targets(16),
            ProductMethod::Exact,
        )
        .unwrap();
        assert_eq!(r.rows.len(), 33);
        for row in &r.rows {
            assert!((row.ratio - 2.0).abs() < 1e-10, "{row:?}");
        }
    }

    #[test]
    fn decomposition_of_two_linear_factors() {
        let rep = chaos_decomposition_check(&[Factor::Wick(1), Factor::Wick(1)], &params(4), 0.3, &[0]).unwrap();
        assert_eq!(rep.components.iter().map(|c| c.0).collect::<Vec<_>>(), vec![2, 0]);
        assert!(rep.residual <= 1e-9 * rep.full.max(1.0), "{rep:?}");
        assert!(chaos_decomposition_check(&[Factor::Wick(4), Factor::Wick(3)], &params(2), 0.3, &[0]).is_err());
        assert!(chaos_decomposition_check(&[Factor::Wick(1)], &params(8), 0.3, &[0]).is_err());
    }

    #[test]
    fn zero_time_duhamel_factor_vanishes() {
        let ex = ProductExpansion::new(&[Factor::Wick(1), Factor::Duhamel(2)], &Lattice::new(1, 2).unwrap(), 0.4, 0.5, 0.0, &[1])
            .unwrap();
        assert!(ex.terms.is_empty());
    }
}
