use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::family::GaussianFamily;
use super::pairing::{enumerate_pairings, Partition};
use crate::error::{domain, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `weight · :factors:`.
#[derive(Clone, Debug, PartialEq)]
pub struct WickTerm<S> {
    pub weight: Complex64,
    pub factors: Vec<S>,
}

/// A formal sum of Wick-ordered monomials of one common order.
#[derive(Clone, Debug, PartialEq)]
pub struct WickComponent<S> {
    order: usize,
    terms: Vec<WickTerm<S>>,
}

impl<S> WickComponent<S> {
    pub fn new(order: usize, terms: Vec<WickTerm<S>>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.factors.len() != order) {
            return Err(domain(format!("term of degree {} in a component of order {order}", t.factors.len())));
        }
        Ok(WickComponent { order, terms })
    }

    pub fn constant(c: Complex64) -> Self {
        WickComponent {
            order: 0,
            terms: vec![WickTerm {
                weight: c,
                factors: Vec::new(),
            }],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[WickTerm<S>] {
        &self.terms
    }
}

/// Symbols of a computation interned to dense ids, closed under
/// conjugation, with the bilinear covariance tabulated.
struct Table<S> {
    symbols: Vec<S>,
    index: BTreeMap<S, usize>,
    conj: Vec<usize>,
    bil: Vec<Complex64>,
}

impl<S: Clone + Ord> Table<S> {
    fn new<'a, F>(family: &F, symbols: impl IntoIterator<Item = &'a S>) -> Self
    where
        F: GaussianFamily<Symbol = S>,
        S: 'a,
    {
        let mut t = Table {
            symbols: Vec::new(),
            index: BTreeMap::new(),
            conj: Vec::new(),
            bil: Vec::new(),
        };
        for s in symbols {
            t.insert(s);
        }
        let mut i = 0;
        while i < t.symbols.len() {
            let c = family.conj(&t.symbols[i]);
            let id = t.insert(&c);
            t.conj.push(id);
            i += 1;
        }
        let m = t.symbols.len();
        t.bil = vec![ZERO; m * m];
        for a in 0..m {
            for b in a..m {
                let v = family.cov(&t.symbols[a], &t.symbols[t.conj[b]]);
                t.bil[a * m + b] = v;
                t.bil[b * m + a] = v;
            }
        }
        t
    }

    fn insert(&mut self, s: &S) -> usize {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.symbols.len();
        self.symbols.push(s.clone());
        self.index.insert(s.clone(), id);
        id
    }

    fn id(&self, s: &S) -> usize {
        self.index[s]
    }

    fn ids(&self, factors: &[S]) -> Vec<usize> {
        factors.iter().map(|s| self.id(s)).collect()
    }

    /// `E[a b]`.
    fn bil(&self, a: usize, b: usize) -> Complex64 {
        self.bil[a * self.symbols.len() + b]
    }

    /// `E[a conj b]`.
    fn cov(&self, a: usize, b: usize) -> Complex64 {
        self.bil(a, self.conj[b])
    }

    /// Isserlis on a sorted id multiset.
    fn expect(&self, ids: &[usize], memo: &mut HashMap<Vec<usize>, Complex64>) -> Complex64 {
        if ids.is_empty() {
            return ONE;
        }
        if ids.len() % 2 == 1 {
            return ZERO;
        }
        if let Some(v) = memo.get(ids) {
            return *v;
        }
        let (a, rest) = (ids[0], &ids[1..]);
        let mut acc = ZERO;
        let mut j = 0;
        while j < rest.len() {
            let b = rest[j];
            let run = rest[j..].iter().take_while(|&&x| x == b).count();
            let c = self.bil(a, b);
            if c != ZERO {
                let mut sub = Vec::with_capacity(rest.len() - 1);
                sub.extend_from_slice(&rest[..j]);
                sub.extend_from_slice(&rest[j + 1..]);
                acc += c * run as f64 * self.expect(&sub, memo);
            }
            j += run;
        }
        memo.insert(ids.to_vec(), acc);
        acc
    }

    /// Sum over perfect pairings with no pair inside a block of the products
    /// of bilinear covariances.
    fn diagram(&self, ids: &[usize], labels: &[usize], used: u64) -> Complex64 {
        let Some(i) = (0..ids.len()).find(|&i| used & (1 << i) == 0) else {
            return ONE;
        };
        let mut acc = ZERO;
        for k in i + 1..ids.len() {
            if used & (1 << k) != 0 || labels[k] == labels[i] {
                continue;
            }
            let c = self.bil(ids[i], ids[k]);
            if c != ZERO {
                acc += c * self.diagram(ids, labels, used | (1 << i) | (1 << k));
            }
        }
        acc
    }
}

/// `E[Π ξ_i]` (no conjugation) by Isserlis' theorem.
pub fn isserlis<F: GaussianFamily>(family: &F, factors: &[F::Symbol]) -> Complex64 {
    let table = Table::new(family, factors);
    let mut ids = table.ids(factors);
    ids.sort_unstable();
    table.expect(&ids, &mut HashMap::new())
}

/// Chaos decomposition of the product of the Wick-ordered blocks of
/// `factors`. Component `ℓ` has order `K - 2ℓ` and collects every pairing
/// with `ℓ` pairs across blocks.
pub fn wick_decompose<F: GaussianFamily>(
    family: &F,
    factors: &[F::Symbol],
    partition: &Partition,
) -> Result<Vec<WickComponent<F::Symbol>>> {
    wick_decompose_sum(family, &[(ONE, factors.to_vec())], partition)
}

/// Linear extension of [`wick_decompose`] to a weighted sum of monomials
/// sharing one block structure. Equal Wick monomials are merged.
pub fn wick_decompose_sum<F: GaussianFamily>(
    family: &F,
    terms: &[(Complex64, Vec<F::Symbol>)],
    partition: &Partition,
) -> Result<Vec<WickComponent<F::Symbol>>> {
    let k = partition.size();
    check_degrees(terms, k)?;
    let table = Table::new(family, terms.iter().flat_map(|t| t.1.iter()));
    let ids: Vec<Vec<usize>> = terms.iter().map(|t| table.ids(&t.1)).collect();
    let mut out = Vec::with_capacity(k / 2 + 1);
    for ell in 0..=k / 2 {
        let pairings = enumerate_pairings(k, partition, ell)?;
        let unpaired: Vec<Vec<usize>> = pairings.iter().map(|p| p.unpaired()).collect();
        let mut acc: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for ((w, _), tid) in terms.iter().zip(&ids) {
            for (p, free) in pairings.iter().zip(&unpaired) {
                let weight = p.pairs().iter().fold(*w, |acc, &(i, j)| acc * table.bil(tid[i], tid[j]));
                if weight == ZERO {
                    continue;
                }
                let mut rest: Vec<usize> = free.iter().map(|&i| tid[i]).collect();
                rest.sort_unstable();
                *acc.entry(rest).or_insert(ZERO) += weight;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, w)| *w != ZERO)
            .map(|(rest, weight)| WickTerm {
                weight,
                factors: rest.iter().map(|&i| table.symbols[i].clone()).collect(),
            })
            .collect();
        out.push(WickComponent { order: k - 2 * ell, terms });
    }
    Ok(out)
}

fn check_degrees<S>(terms: &[(Complex64, Vec<S>)], k: usize) -> Result<()> {
    match terms.iter().find(|t| t.1.len() != k) {
        Some(t) => Err(domain(format!("monomial of degree {} does not fit a partition of {k}", t.1.len()))),
        None => Ok(()),
    }
}

/// Permanent by Ryser's inclusion–exclusion formula.
pub fn permanent(m: usize, entry: impl Fn(usize, usize) -> Complex64) -> Complex64 {
    if m == 0 {
        return ONE;
    }
    let a: Vec<Complex64> = (0..m * m).map(|k| entry(k / m, k % m)).collect();
    let mut total = ZERO;
    for s in 1u64..(1 << m) {
        let mut prod = ONE;
        for i in 0..m {
            let row: Complex64 = (0..m).filter(|j| s >> j & 1 == 1).map(|j| a[i * m + j]).sum();
            prod *= row;
        }
        if (m - s.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// `E[A · conj B]` for two chaos components.
///
/// Components of different order are orthogonal; for equal order `m` each
/// pair of terms contributes the permanent of the `m × m` cross-covariance.
pub fn chaos_covariance<F: GaussianFamily>(
    family: &F,
    a: &WickComponent<F::Symbol>,
    b: &WickComponent<F::Symbol>,
) -> Complex64 {
    if a.order != b.order {
        return ZERO;
    }
    let m = a.order;
    let table = Table::new(
        family,
        a.terms.iter().chain(&b.terms).flat_map(|t| t.factors.iter()),
    );
    let class_key = |t: &WickTerm<F::Symbol>| {
        let mut k: Vec<Vec<i64>> = t.factors.iter().map(|s| family.class(s)).collect();
        k.sort_unstable();
        k
    };
    let mut buckets: BTreeMap<Vec<Vec<i64>>, Vec<(Complex64, Vec<usize>)>> = BTreeMap::new();
    for t in &b.terms {
        buckets.entry(class_key(t)).or_default().push((t.weight, table.ids(&t.factors)));
    }
    let parts: Vec<Complex64> = a
        .terms
        .par_iter()
        .map(|t| {
            let Some(bucket) = buckets.get(&class_key(t)) else {
                return ZERO;
            };
            let ai = table.ids(&t.factors);
            bucket
                .iter()
                .map(|(v, bi)| t.weight * v.conj() * permanent(m, |i, j| table.cov(ai[i], bi[j])))
                .sum()
        })
        .collect();
    parts.into_iter().sum()
}

/// `E|F|²` for `F = Σ w · Π_blocks :block:`, summing every pairing of
/// `F · conj F` that avoids pairs inside a block.
pub fn second_moment<F: GaussianFamily>(
    family: &F,
    terms: &[(Complex64, Vec<F::Symbol>)],
    partition: &Partition,
) -> Result<f64> {
    let k = partition.size();
    check_degrees(terms, k)?;
    if 2 * k > 64 {
        return Err(Error::Unsupported(format!("monomials of degree {k} are too large")));
    }
    let table = Table::new(family, terms.iter().flat_map(|t| t.1.iter()));
    let ids: Vec<Vec<usize>> = terms.iter().map(|t| table.ids(&t.1)).collect();
    let cids: Vec<Vec<usize>> = ids.iter().map(|v| v.iter().map(|&i| table.conj[i]).collect()).collect();
    let labels = partition.concat(partition).labels().to_vec();
    let n = terms.len();
    let parts: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut joined = Vec::with_capacity(2 * k);
            let mut acc = 0.0;
            for b in a..n {
                joined.clear();
                joined.extend_from_slice(&ids[a]);
                joined.extend_from_slice(&cids[b]);
                let c = terms[a].0 * terms[b].0.conj() * table.diagram(&joined, &labels, 0);
                acc += if a == b { c.re } else { 2.0 * c.re };
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().sum())
}

type Poly = BTreeMap<Vec<usize>, Complex64>;

fn poly_mul(x: &Poly, y: &Poly) -> Poly {
    let mut out = Poly::new();
    for (a, wa) in x {
        for (b, wb) in y {
            let mut m = a.clone();
            m.extend_from_slice(b);
            m.sort_unstable();
            *out.entry(m).or_insert(ZERO) += wa * wb;
        }
    }
    out
}

impl<S: Clone + Ord> Table<S> {
    fn poly_conj(&self, x: &Poly) -> Poly {
        let mut out = Poly::new();
        for (m, w) in x {
            let mut c: Vec<usize> = m.iter().map(|&i| self.conj[i]).collect();
            c.sort_unstable();
            *out.entry(c).or_insert(ZERO) += w.conj();
        }
        out
    }

    /// `E[X · Y]` for ordinary polynomials.
    fn poly_expect(&self, x: &Poly, y: &Poly, memo: &mut HashMap<Vec<usize>, Complex64>) -> Complex64 {
        let mut acc = ZERO;
        for (a, wa) in x {
            for (b, wb) in y {
                let mut m = a.clone();
                m.extend_from_slice(b);
                m.sort_unstable();
                acc += wa * wb * self.expect(&m, memo);
            }
        }
        acc
    }
}

/// `‖X‖_{L^p} / ‖X‖_{L^2}` for a chaos component, computed exactly.
///
/// The Wick monomials are expanded into ordinary polynomials and the
/// moments `E[X^{p/2} conj X^{p/2}]` evaluated by Isserlis.
pub fn hyper_check<F: GaussianFamily>(family: &F, component: &WickComponent<F::Symbol>, p: usize) -> Result<f64> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Unsupported(format!("p = {p} must be an even integer ≥ 2")));
    }
    let m = component.order;
    let table = Table::new(family, component.terms.iter().flat_map(|t| t.factors.iter()));
    let all = Partition::singletons(m);
    let mut x = Poly::new();
    for ell in 0..=m / 2 {
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        for pairing in enumerate_pairings(m, &all, ell)? {
            let free = pairing.unpaired();
            for t in &component.terms {
                let ids = table.ids(&t.factors);
                let w = pairing
                    .pairs()
                    .iter()
                    .fold(t.weight * sign, |acc, &(i, j)| acc * table.bil(ids[i], ids[j]));
                if w == ZERO {
                    continue;
                }
                let mut rest: Vec<usize> = free.iter().map(|&i| ids[i]).collect();
                rest.sort_unstable();
                *x.entry(rest).or_insert(ZERO) += w;
            }
        }
    }
    let mut memo = HashMap::new();
    let l2 = table.poly_expect(&x, &table.poly_conj(&x), &mut memo).re;
    if l2 <= 0.0 {
        return Err(domain("component has zero variance"));
    }
    let mut y = Poly::from([(Vec::new(), ONE)]);
    for _ in 0..p / 2 {
        y = poly_mul(&y, &x);
    }
    let lp = table.poly_expect(&y, &table.poly_conj(&y), &mut memo).re;
    Ok(lp.max(0.0).powf(1.0 / p as f64) / l2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{DenseFamily, WaveFamily, WaveSymbol};
    use crate::stochastic::hermite;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn unit() -> DenseFamily {
        DenseFamily::real(vec![vec![1.0]]).unwrap()
    }

    #[test]
    fn isserlis_examples() {
        let fam = DenseFamily::real(vec![vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        assert_eq!(isserlis(&fam, &[0]), ZERO);
        assert_eq!(isserlis(&fam, &[0, 0, 0, 0]), c(3.0));
        assert_eq!(isserlis(&fam, &[0, 1]), c(0.3));
        // E[a²b²] = E a² E b² + 2 E[ab]²
        assert!((isserlis(&fam, &[0, 0, 1, 1]).re - (2.0 + 2.0 * 0.09)).abs() < 1e-14);
        assert_eq!(isserlis(&fam, &[]), ONE);
    }

    #[test]
    fn two_factor_decomposition() {
        let fam = DenseFamily::real(vec![vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let comps = wick_decompose(&fam, &[0, 1], &Partition::singletons(2)).unwrap();
        assert_eq!(comps[0].order(), 2);
        assert_eq!(comps[0].terms(), &[WickTerm { weight: ONE, factors: vec![0, 1] }]);
        assert_eq!(comps[1].order(), 0);
        assert_eq!(comps[1].terms()[0].weight, c(0.3));
    }

    #[test]
    fn cube_decomposition() {
        let sigma = 0.7;
        let fam = DenseFamily::real(vec![vec![sigma]]).unwrap();
        let comps = wick_decompose(&fam, &[0, 0, 0], &Partition::singletons(3)).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!((comps[0].order(), comps[0].terms()[0].weight), (3, ONE));
        assert_eq!(comps[1].order(), 1);
        assert!((comps[1].terms()[0].weight.re - 3.0 * sigma).abs() < 1e-15);
    }

    #[test]
    fn decomposition_reassembles_powers() {
        // :g^m: = H_m(g; σ) for a single real symbol
        let sigma = 1.3;
        let fam = DenseFamily::real(vec![vec![sigma]]).unwrap();
        for j in 1..=8 {
            let comps = wick_decompose(&fam, &vec![0; j], &Partition::singletons(j)).unwrap();
            for x in [-1.7, 0.2, 2.4] {
                let total: f64 = comps
                    .iter()
                    .flat_map(|cp| cp.terms().iter().map(move |t| t.weight.re * hermite(cp.order(), x, sigma)))
                    .sum();
                assert!((total - x.powi(j as i32)).abs() < 1e-9 * x.abs().powi(j as i32).max(1.0));
            }
        }
    }

    #[test]
    fn covariance_examples() {
        let fam = unit();
        let c2 = WickComponent::new(2, vec![WickTerm { weight: ONE, factors: vec![0, 0] }]).unwrap();
        let c1 = WickComponent::new(1, vec![WickTerm { weight: ONE, factors: vec![0] }]).unwrap();
        let c3 = WickComponent::new(3, vec![WickTerm { weight: ONE, factors: vec![0, 0, 0] }]).unwrap();
        assert_eq!(chaos_covariance(&fam, &c2, &c1), ZERO);
        assert!((chaos_covariance(&fam, &c2, &c2).re - 2.0).abs() < 1e-14);
        assert!((chaos_covariance(&fam, &c3, &c3).re - 6.0).abs() < 1e-13);
        assert!(WickComponent::new(2, vec![WickTerm { weight: ONE, factors: vec![0] }]).is_err());
    }

    #[test]
    fn permanent_small() {
        let m = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        // 1(45+48) + 2(36+42) + 3(32+35)
        assert!((permanent(3, |i, j| c(m[i][j])).re - 450.0).abs() < 1e-10);
        assert_eq!(permanent(0, |_, _| ZERO), ONE);
    }

    #[test]
    fn hypercontractivity_examples() {
        let fam = unit();
        let g = WickComponent::new(1, vec![WickTerm { weight: ONE, factors: vec![0] }]).unwrap();
        let r = hyper_check(&fam, &g, 4).unwrap();
        assert!((r - 3f64.powf(0.25)).abs() < 1e-12);
        let h2 = WickComponent::new(2, vec![WickTerm { weight: ONE, factors: vec![0, 0] }]).unwrap();
        let r = hyper_check(&fam, &h2, 4).unwrap();
        assert!((r - 60f64.powf(0.25) / 2f64.sqrt()).abs() < 1e-12);
        assert!(r <= 3.0);
        let k = WickComponent::<usize>::constant(c(-2.5));
        assert!((hyper_check(&fam, &k, 6).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(hyper_check(&fam, &g, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pythagoras_on_wave_symbols() {
        let fam = WaveFamily::new(0.4, 0.5, vec![0.0, 0.3]);
        let s = |n: i64, t| WaveSymbol::new(n, t);
        let monomials = [
            vec![s(1, 0), s(-1, 1)],
            vec![s(2, 0), s(-2, 0), s(1, 1)],
            vec![s(1, 0), s(1, 1), s(-1, 0), s(-1, 1)],
            vec![s(0, 0), s(0, 1), s(3, 0), s(-3, 1), s(0, 0)],
        ];
        for m in monomials {
            let k = m.len();
            let comps = wick_decompose(&fam, &m, &Partition::singletons(k)).unwrap();
            let sum: f64 = comps.iter().map(|cp| chaos_covariance(&fam, cp, cp).re).sum();
            let mut both = m.clone();
            both.extend(m.iter().map(|x| fam.conj(x)));
            let full = isserlis(&fam, &both).re;
            assert!((sum - full).abs() < 1e-9 * full.abs().max(1.0), "{sum} vs {full}");
            let direct = second_moment(&fam, &[(ONE, m.clone())], &Partition::singletons(k)).unwrap();
            assert!((direct - full).abs() < 1e-9 * full.abs().max(1.0));
        }
    }

    #[test]
    fn block_moment_matches_components() {
        let fam = WaveFamily::new(0.3, 0.7, vec![0.0, 0.4]);
        let s = |n: i64, t| WaveSymbol::new(n, t);
        let part = Partition::contiguous(&[2, 2]);
        let terms: Vec<(Complex64, Vec<WaveSymbol>)> = (-2..=2)
            .map(|a: i64| (c(1.0 + a as f64 * 0.1), vec![s(a, 0), s(1 - a, 0), s(-a, 1), s(a, 1)]))
            .collect();
        let comps = wick_decompose_sum(&fam, &terms, &part).unwrap();
        let sum: f64 = comps.iter().map(|cp| chaos_covariance(&fam, cp, cp).re).sum();
        let full = second_moment(&fam, &terms, &part).unwrap();
        assert!((sum - full).abs() < 1e-10 * full, "{sum} vs {full}");
    }
}
