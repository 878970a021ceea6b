//! Lattice convolution sums `Σ ⟨n₁⟩^{-a} ⟨n₂⟩^{-b}` and their three-factor
//! analogue, with rigorous truncation tails and sweeps against the claimed
//! power-law bounds.
//!
//! Sums run over the sup-norm box `|m|_∞ ≤ R`. The tail beyond the box is
//! bounded by comparing with `Σ_{|m|_∞ > R} ⟨m⟩^{-p}`, which in turn is at
//! most `C(d) R^{d-p} / (p - d)` with `C(1) = 2` (two half-lines) and
//! `C(2) = 8` (the sup-norm shell `|m|_∞ = k` has `8k` points). Shifted
//! factors `⟨n - m⟩^{-b}` are compared with `⟨m⟩^{-b}` using `R ≥ 2|n|`:
//! then `⟨n - m⟩ ≥ ⟨m⟩/2` and `⟨n - m⟩ ≤ 3⟨m⟩/2` outside the box.

use std::fmt;
use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::spectral::{fft_nd, grid_size, FreqVec};

/// A truncated convolution sum together with its error bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SumReport {
    pub d: usize,
    /// `[a, b]` or `[a, b, c]`.
    pub exponents: Vec<f64>,
    /// `[n]` for two-factor sums, `[avec, bvec]` for three-factor sums.
    pub shifts: Vec<FreqVec>,
    pub radius: usize,
    /// The sum over `|m|_∞ ≤ R`.
    pub value: f64,
    /// Upper bound on the omitted part `|m|_∞ > R`.
    pub tail_bound: f64,
    /// Floating-point error budget of the FFT route; zero for direct sums.
    pub rounding_bound: f64,
}

impl SumReport {
    /// Upper bound on the untruncated sum.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound + self.rounding_bound
    }
}

/// Number-of-points constant of the tail comparison.
pub fn shell_constant(d: usize) -> f64 {
    match d {
        1 => 2.0,
        _ => 8.0,
    }
}

/// `C(d) R^{d-p} / (p - d)`, a bound on `Σ_{|m|_∞ > R} ⟨m⟩^{-p}` for `p > d`.
pub fn tail_bound(d: usize, p: f64, radius: usize) -> f64 {
    let dd = d as f64;
    shell_constant(d) * (radius as f64).powf(dd - p) / (p - dd)
}

/// Constant `K` with `⟨n - m⟩^{-b} ≤ K ⟨m⟩^{-b}` whenever `|m| ≥ 2|n|`.
fn shift_factor(b: f64) -> f64 {
    if b >= 0.0 {
        2f64.powf(b)
    } else {
        1.5f64.powf(-b)
    }
}

fn weight(m: &[i64], p: f64) -> f64 {
    let sq: i64 = m.iter().map(|c| c * c).sum();
    (1.0 + sq as f64).powf(-0.5 * p)
}

fn check_dim(d: usize, vs: &[&FreqVec]) -> Result<()> {
    if d == 0 || d > 2 {
        return Err(Error::Unsupported(format!("convolution sums in d={d}; only d=1 and d=2 are supported")));
    }
    for v in vs {
        if v.dim() != d {
            return Err(Error::Dimension(format!("frequency {v} is not in Z^{d}")));
        }
    }
    Ok(())
}

fn check_finite(exps: &[f64]) -> Result<()> {
    if exps.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(domain(format!("exponents {exps:?} must be finite")))
    }
}

fn check_radius(radius: usize, vs: &[&FreqVec]) -> Result<()> {
    let need = vs.iter().map(|v| (v.norm_sq() as f64).sqrt()).fold(0.0, f64::max);
    if radius == 0 || (radius as f64) < 2.0 * need {
        return Err(domain(format!(
            "radius {radius} must be positive and at least twice the largest shift norm {need:.6}"
        )));
    }
    Ok(())
}

fn check_pair(d: usize, a: f64, b: f64) -> Result<()> {
    check_finite(&[a, b])?;
    if a + b <= d as f64 {
        return Err(Error::Divergence(format!("a + b > d fails: {a} + {b} <= {d}")));
    }
    Ok(())
}

/// Hypotheses of the three-factor bound: `a + 2b > d`, `a + 2c > d`, `a < d`,
/// `2b < d`, `2c < d`.
pub fn check_triple(d: usize, a: f64, b: f64, c: f64) -> Result<()> {
    check_finite(&[a, b, c])?;
    let dd = d as f64;
    let tests = [
        (a + 2.0 * b > dd, format!("a + 2b > d fails: {a} + 2*{b} <= {d}")),
        (a + 2.0 * c > dd, format!("a + 2c > d fails: {a} + 2*{c} <= {d}")),
        (a < dd, format!("a < d fails: {a} >= {d}")),
        (2.0 * b < dd, format!("2b < d fails: 2*{b} >= {d}")),
        (2.0 * c < dd, format!("2c < d fails: 2*{c} >= {d}")),
    ];
    match tests.into_iter().find(|(ok, _)| !ok) {
        Some((_, msg)) => Err(domain(msg)),
        None => Ok(()),
    }
}

/// Calls `f` on every `m` with `|m|_∞ ≤ radius`, in lexicographic order.
fn for_box(d: usize, radius: usize, mut f: impl FnMut(&[i64])) {
    let r = radius as i64;
    match d {
        1 => (-r..=r).for_each(|m| f(&[m])),
        _ => {
            for m1 in -r..=r {
                for m2 in -r..=r {
                    f(&[m1, m2]);
                }
            }
        }
    }
}

/// `Σ_{|m|_∞ ≤ R} ⟨m⟩^{-a} ⟨n - m⟩^{-b}` with a tail bound, by direct
/// summation.
pub fn conv_sum2(d: usize, a: f64, b: f64, n: &FreqVec, radius: usize) -> Result<SumReport> {
    check_dim(d, &[n])?;
    check_pair(d, a, b)?;
    check_radius(radius, &[n])?;
    let mut value = 0.0;
    let mut k = vec![0i64; d];
    for_box(d, radius, |m| {
        for i in 0..d {
            k[i] = n.0[i] - m[i];
        }
        value += weight(m, a) * weight(&k, b);
    });
    Ok(SumReport {
        d,
        exponents: vec![a, b],
        shifts: vec![n.clone()],
        radius,
        value,
        tail_bound: shift_factor(b) * tail_bound(d, a + b, radius),
        rounding_bound: 0.0,
    })
}

/// [`conv_sum2`] over many targets: direct sums from power tables in d=1, one
/// FFT linear convolution in d=2.
pub fn conv_sum2_sweep(d: usize, a: f64, b: f64, targets: &[FreqVec], radius: usize) -> Result<Vec<SumReport>> {
    let refs: Vec<&FreqVec> = targets.iter().collect();
    check_dim(d, &refs)?;
    check_pair(d, a, b)?;
    check_radius(radius, &refs)?;
    let tail = shift_factor(b) * tail_bound(d, a + b, radius);
    let report = |n: &FreqVec, value: f64, rounding_bound: f64| SumReport {
        d,
        exponents: vec![a, b],
        shifts: vec![n.clone()],
        radius,
        value,
        tail_bound: tail,
        rounding_bound,
    };
    let s = targets.iter().map(FreqVec::sup_norm).max().unwrap_or(0) as usize;
    if d == 1 {
        let r = radius as i64;
        let wa: Vec<f64> = (-r..=r).map(|m| weight(&[m], a)).collect();
        let off = r + s as i64;
        let wb: Vec<f64> = (-off..=off).map(|m| weight(&[m], b)).collect();
        return Ok(targets
            .par_iter()
            .map(|n| {
                let value = (-r..=r)
                    .map(|m| wa[(m + r) as usize] * wb[(n.0[0] - m + off) as usize])
                    .sum();
                report(n, value, 0.0)
            })
            .collect());
    }
    let values = fft_conv2(a, b, radius, s);
    Ok(targets
        .iter()
        .map(|n| report(n, values.value(&n.0), values.rounding_bound))
        .collect())
}

struct Conv2 {
    side: usize,
    shift: usize,
    data: Vec<Complex<f64>>,
    rounding_bound: f64,
}

impl Conv2 {
    fn value(&self, n: &[i64]) -> f64 {
        let l = self.side as i64;
        let idx = |c: i64| ((c + self.shift as i64).rem_euclid(l)) as usize;
        self.data[idx(n[0]) * self.side + idx(n[1])].re
    }
}

/// Linear convolution of `⟨m⟩^{-a}` on `|m|_∞ ≤ R` with `⟨k⟩^{-b}` on
/// `|k|_∞ ≤ R + S`, valid at outputs `|n|_∞ ≤ S`.
fn fft_conv2(a: f64, b: f64, radius: usize, s: usize) -> Conv2 {
    let outer = radius + s;
    // Wanted outputs sit at indices [2R, 2R + 2S]; a length above 2R + 2S
    // keeps their circular aliases outside the support of the full product.
    let side = grid_size(2 * outer + 1);
    let zero = Complex::new(0.0, 0.0);
    let mut fa = vec![zero; side * side];
    let mut fb = vec![zero; side * side];
    let (mut na, mut nb) = (0.0, 0.0);
    let r = radius as i64;
    for m1 in -r..=r {
        for m2 in -r..=r {
            let w = weight(&[m1, m2], a);
            na += w * w;
            fa[(m1 + r) as usize * side + (m2 + r) as usize] = Complex::new(w, 0.0);
        }
    }
    let o = outer as i64;
    for k1 in -o..=o {
        for k2 in -o..=o {
            let w = weight(&[k1, k2], b);
            nb += w * w;
            fb[(k1 + o) as usize * side + (k2 + o) as usize] = Complex::new(w, 0.0);
        }
    }
    fft_nd(&mut fa, 2, side, false);
    fft_nd(&mut fb, 2, side, false);
    let scale = 1.0 / (side * side) as f64;
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y * scale;
    }
    fft_nd(&mut fa, 2, side, true);
    let levels = ((side * side) as f64).log2();
    Conv2 {
        side,
        shift: radius + outer,
        data: fa,
        rounding_bound: 8.0 * f64::EPSILON * levels * (na * nb).sqrt(),
    }
}

/// `Σ_{|n|_∞ ≤ R} ⟨n⟩^{-a} ⟨n + A⟩^{-b} ⟨n + B⟩^{-c}` with a tail bound.
pub fn conv_sum3(d: usize, a: f64, b: f64, c: f64, avec: &FreqVec, bvec: &FreqVec, radius: usize) -> Result<SumReport> {
    check_dim(d, &[avec, bvec])?;
    check_triple(d, a, b, c)?;
    check_radius(radius, &[avec, bvec])?;
    let mut value = 0.0;
    let (mut p, mut q) = (vec![0i64; d], vec![0i64; d]);
    for_box(d, radius, |n| {
        for i in 0..d {
            p[i] = n[i] + avec.0[i];
            q[i] = n[i] + bvec.0[i];
        }
        value += weight(n, a) * weight(&p, b) * weight(&q, c);
    });
    Ok(SumReport {
        d,
        exponents: vec![a, b, c],
        shifts: vec![avec.clone(), bvec.clone()],
        radius,
        value,
        tail_bound: shift_factor(b) * shift_factor(c) * tail_bound(d, a + b + c, radius),
        rounding_bound: 0.0,
    })
}

/// Which bound a sweep tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SumCase {
    /// `Σ ⟨n₁⟩^{-a}⟨n₂⟩^{-b} ≲ ⟨n⟩^{d-a-b}` for `a + b > d`, `a, b < d`.
    Pair { a: f64, b: f64 },
    /// `Σ ⟨n⟩^{-a}⟨n+A⟩^{-b}⟨n+B⟩^{-c} ≲ ⟨A⟩^{d/2-a/2-b} ⟨B⟩^{d/2-a/2-c}`.
    Triple { a: f64, b: f64, c: f64 },
}

impl SumCase {
    pub fn check(&self, d: usize) -> Result<()> {
        match *self {
            SumCase::Pair { a, b } => {
                check_pair(d, a, b)?;
                let dd = d as f64;
                if a >= dd || b >= dd {
                    return Err(domain(format!("a, b < d fails: a={a}, b={b}, d={d}")));
                }
                Ok(())
            }
            SumCase::Triple { a, b, c } => check_triple(d, a, b, c),
        }
    }
}

impl fmt::Display for SumCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumCase::Pair { a, b } => write!(f, "pair a={a} b={b}"),
            SumCase::Triple { a, b, c } => write!(f, "triple a={a} b={b} c={c}"),
        }
    }
}

/// One swept target.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub target: String,
    /// Abscissa of the growth test (`⟨n⟩`, or `⟨A⟩` on the diagonal `A = B`).
    pub scale: f64,
    /// Whether the row is on the path used by the growth test.
    pub tracked: bool,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub tail: f64,
}

/// Sup/inf of value over claimed bound across a sweep, with growth flags.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub sup: f64,
    pub inf: f64,
    /// The tracked ratio increases strictly across the top octave.
    pub monotone_top_octave: bool,
    /// Monotone increase over the top octave without deceleration: the top
    /// octave's increment is at least [`GROWTH_DECELERATION`] times the
    /// previous octave's.
    pub growth_flag: bool,
}

/// Octave-increment ratio below which monotone growth counts as settling.
pub const GROWTH_DECELERATION: f64 = 0.95;

impl VerifyReport {
    pub fn from_rows(rows: Vec<VerifyRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InsufficientData("empty sweep".into()));
        }
        let sup = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let inf = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let mut path: Vec<(f64, f64)> = rows.iter().filter(|r| r.tracked).map(|r| (r.scale, r.ratio)).collect();
        path.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (monotone_top_octave, growth_flag) = growth_flags(&path);
        Ok(VerifyReport {
            rows,
            sup,
            inf,
            monotone_top_octave,
            growth_flag,
        })
    }

    pub fn spread(&self) -> f64 {
        self.sup / self.inf
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["target", "value", "bound", "ratio", "tail"])?;
        for r in &self.rows {
            out.write_record([
                r.target.clone(),
                r.value.to_string(),
                r.bound.to_string(),
                r.ratio.to_string(),
                r.tail.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn nearest(path: &[(f64, f64)], x: f64) -> usize {
    let key = |i: usize| (path[i].0.ln() - x.ln()).abs();
    (0..path.len()).min_by(|&i, &j| key(i).total_cmp(&key(j))).expect("nonempty path")
}

/// `(monotone_top_octave, growth_flag)` for a path sorted by scale.
fn growth_flags(path: &[(f64, f64)]) -> (bool, bool) {
    if path.len() < 2 {
        return (false, false);
    }
    let top = path.len() - 1;
    let x_max = path[top].0;
    let octave: Vec<f64> = path.iter().filter(|p| p.0 >= 0.5 * x_max).map(|p| p.1).collect();
    let monotone = octave.len() >= 2 && octave.windows(2).all(|w| w[1] > w[0]);
    if !monotone {
        return (false, false);
    }
    let half = nearest(path, 0.5 * x_max);
    let quarter = nearest(path, 0.25 * x_max);
    if half == top || quarter == half {
        return (true, true);
    }
    let inc_top = path[top].1 - path[half].1;
    let inc_prev = path[half].1 - path[quarter].1;
    let growth = inc_prev <= 0.0 || inc_top >= GROWTH_DECELERATION * inc_prev;
    (true, growth)
}

fn label(parts: &[(&str, &FreqVec)]) -> String {
    parts
        .iter()
        .map(|(name, v)| {
            let c: Vec<String> = v.0.iter().map(i64::to_string).collect();
            format!("{name}={}", c.join(";"))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Integers `m ≥ 0` with `⟨m⟩ ∈ [lo, hi]`, thinned geometrically (about 64
/// per octave) when there are more than 512.
fn sweep_integers(lo: f64, hi: f64) -> Vec<i64> {
    let first = (lo * lo - 1.0).max(0.0).sqrt().ceil() as i64;
    let last = (hi * hi - 1.0).max(0.0).sqrt().floor() as i64;
    if last < first {
        return Vec::new();
    }
    if last - first < 512 {
        return (first..=last).collect();
    }
    let mut out: Vec<i64> = Vec::new();
    let start = (first.max(1) as f64).log2();
    let steps = (((last as f64).log2() - start) * 64.0).ceil() as usize;
    for i in 0..=steps {
        let m = 2f64.powf(start + i as f64 / 64.0).round() as i64;
        let m = m.clamp(first, last);
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    if first == 0 {
        out.insert(0, 0);
    }
    out
}

/// Values `2^j` and `3·2^{j-1}` with bracket in `[lo, hi]`.
fn sweep_dyadic(lo: f64, hi: f64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut p = 1i64;
    while (p as f64) <= hi {
        for v in [p, 3 * p / 2] {
            let br = (1.0 + (v * v) as f64).sqrt();
            if v > 0 && br >= lo && br <= hi && !out.contains(&v) {
                out.push(v);
            }
        }
        p *= 2;
    }
    out.sort_unstable();
    out
}

fn axis(d: usize, axis: usize, v: i64) -> FreqVec {
    let mut c = vec![0; d];
    c[axis] = v;
    FreqVec(c)
}

/// Sweeps the chosen bound over targets whose bracket lies in `range` and
/// reports the ratio of truncated sum to claimed bound.
///
/// The pair case sweeps `n = (m, 0, …)` over every integer in range; the
/// triple case sweeps `A = m e₁`, `B = m' e_d` with `m, m'` on the grid
/// `{2^j, 3·2^{j-1}}`, tracking growth along `m = m'`.
pub fn lemma_sum_verify(case: SumCase, d: usize, range: (f64, f64), radius: usize) -> Result<VerifyReport> {
    check_dim(d, &[])?;
    case.check(d)?;
    let (lo, hi) = range;
    if !(lo >= 1.0 && hi >= lo) {
        return Err(domain(format!("sweep range [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
    }
    let dd = d as f64;
    let rows = match case {
        SumCase::Pair { a, b } => {
            let targets: Vec<FreqVec> = sweep_integers(lo, hi).into_iter().map(|m| axis(d, 0, m)).collect();
            if targets.is_empty() {
                return Err(Error::InsufficientData(format!("no frequency has bracket in [{lo}, {hi}]")));
            }
            conv_sum2_sweep(d, a, b, &targets, radius)?
                .into_iter()
                .map(|r| {
                    let n = &r.shifts[0];
                    let scale = n.bracket();
                    let bound = scale.powf(dd - a - b);
                    VerifyRow {
                        target: label(&[("n", n)]),
                        scale,
                        tracked: true,
                        value: r.value,
                        bound,
                        ratio: r.value / bound,
                        tail: r.tail_bound + r.rounding_bound,
                    }
                })
                .collect()
        }
        SumCase::Triple { a, b, c } => {
            let grid = sweep_dyadic(lo, hi);
            if grid.is_empty() {
                return Err(Error::InsufficientData(format!("no sweep value has bracket in [{lo}, {hi}]")));
            }
            let pairs: Vec<(i64, i64)> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect();
            pairs
                .par_iter()
                .map(|&(x, y)| {
                    let (av, bv) = (axis(d, 0, x), axis(d, d - 1, y));
                    let r = conv_sum3(d, a, b, c, &av, &bv, radius)?;
                    let bound = av.bracket().powf(0.5 * dd - 0.5 * a - b) * bv.bracket().powf(0.5 * dd - 0.5 * a - c);
                    Ok(VerifyRow {
                        target: label(&[("a", &av), ("b", &bv)]),
                        scale: av.bracket(),
                        tracked: x == y,
                        value: r.value,
                        bound,
                        ratio: r.value / bound,
                        tail: r.tail_bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    VerifyReport::from_rows(rows)
}
