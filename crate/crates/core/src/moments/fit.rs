use std::collections::BTreeMap;
use std::fmt;

use super::table::{shell_center, shell_of, MomentTable, Target};
use crate::error::{Error, Result};
use crate::solver::fmt_num;
use crate::spectral::bracket;

/// Log-log power-law fit of shell-averaged moments against `⟨n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(-slope - d) / 2`
    pub s0_hat: f64,
    pub stderr: f64,
    pub shell_range: (u32, u32),
    pub shells_used: usize,
}

/// Shells `2 ..= j_max` with `j_max` the largest `j` such that
/// `2^{j+1} ≤ N/2`; the lowest shells and those touching the cutoff are
/// dropped.
pub fn default_shell_range(cutoff: usize) -> (u32, u32) {
    let mut j = 0u32;
    while 2usize.pow(j + 2) <= cutoff / 2 {
        j += 1;
    }
    (2, j)
}

/// Weighted least squares `y ≈ a + b x`, returning `(a, b, stderr of b)`.
pub fn weighted_line(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let n = points.len();
    let se = if n > 2 {
        let ssr: f64 = points.iter().map(|p| p.2 * (p.1 - a - b * p.0).powi(2)).sum();
        (ssr / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    (a, b, se)
}

/// Fits `log E|X̂|² ≈ c + slope · log⟨n⟩` over the shells in `range`.
///
/// Shell rows are placed at the shell centre `2^{j+1/2}`. Per-mode rows are
/// grouped by shell and placed at the mean of `log⟨n⟩`, so exact power laws
/// are recovered exactly. Rows with estimated errors are weighted by the
/// inverse variance of the log; exact rows get unit weight.
pub fn fit_exponent(table: &MomentTable, d: usize, range: (u32, u32)) -> Result<ExponentFit> {
    struct Shell {
        x: f64,
        y: f64,
        rel_var: f64,
        count: usize,
    }
    let mut shells: BTreeMap<u32, Shell> = BTreeMap::new();
    for e in table.entries() {
        if !(e.estimate > 0.0) {
            continue;
        }
        let (j, x) = match &e.target {
            Target::Shell(j) => (*j, shell_center(*j).ln()),
            Target::Mode(n) => (shell_of(&n.0), bracket(&n.0).ln()),
        };
        if j < range.0 || j > range.1 {
            continue;
        }
        let s = shells.entry(j).or_insert(Shell {
            x: 0.0,
            y: 0.0,
            rel_var: 0.0,
            count: 0,
        });
        s.x += x;
        s.y += e.estimate.ln();
        s.rel_var += (e.stderr / e.estimate).powi(2);
        s.count += 1;
    }
    if shells.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable shells in {}..={}, need at least 3",
            shells.len(),
            range.0,
            range.1
        )));
    }
    let weighted = shells.values().all(|s| s.rel_var > 0.0);
    let points: Vec<(f64, f64, f64)> = shells
        .values()
        .map(|s| {
            let c = s.count as f64;
            let w = if weighted { c * c / s.rel_var } else { 1.0 };
            (s.x / c, s.y / c, w)
        })
        .collect();
    let (intercept, slope, stderr) = weighted_line(&points);
    Ok(ExponentFit {
        slope,
        intercept,
        s0_hat: (-slope - d as f64) / 2.0,
        stderr,
        shell_range: range,
        shells_used: points.len(),
    })
}

/// Joint fit of increment moments
/// `E|δ_h X̂(n)|² ≈ C ⟨n⟩^{-d-2s₀+σ₁} h^{σ₂}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeFit {
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Regresses `log v` on `(log⟨n⟩, log h)` for rows `(⟨n⟩, h, v)` and reads
/// off `σ₁ = slope_n + d + 2s₀` and `σ₂ = slope_h`.
pub fn fit_increment(rows: &[(f64, f64, f64)], d: usize, s0: f64) -> Result<TimeFit> {
    let pts: Vec<[f64; 3]> = rows
        .iter()
        .filter(|r| r.0 > 0.0 && r.1 > 0.0 && r.2 > 0.0)
        .map(|r| [r.0.ln(), r.1.ln(), r.2.ln()])
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("{} usable rows, need at least 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mean = |k: usize| pts.iter().map(|p| p[k]).sum::<f64>() / n;
    let (mx, mh, my) = (mean(0), mean(1), mean(2));
    let cov = |a: usize, ma: f64, b: usize, mb: f64| pts.iter().map(|p| (p[a] - ma) * (p[b] - mb)).sum::<f64>();
    let (sxx, shh, sxh) = (cov(0, mx, 0, mx), cov(1, mh, 1, mh), cov(0, mx, 1, mh));
    let (sxy, shy) = (cov(0, mx, 2, my), cov(1, mh, 2, my));
    let det = sxx * shh - sxh * sxh;
    if det.abs() < 1e-12 * (sxx * shh).max(1e-300) {
        return Err(Error::InsufficientData("frequencies and steps are collinear".into()));
    }
    let bn = (sxy * shh - shy * sxh) / det;
    let bh = (shy * sxx - sxy * sxh) / det;
    Ok(TimeFit {
        sigma1: bn + d as f64 + 2.0 * s0,
        sigma2: bh,
    })
}

/// Regularity read off from Fourier decay. The decay exponent is a
/// necessary proxy for `W^{s,∞}` membership, not a proof of it.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub s0: f64,
    pub time_fit: Option<TimeFit>,
}

impl RegularityReport {
    /// Space-time claim `s < s₀ - σ₁/2` when a time fit is present.
    pub fn spacetime_bound(&self) -> Option<f64> {
        self.time_fit.map(|f| self.s0 - f.sigma1 / 2.0)
    }
}

pub fn regularity_report(fit: &ExponentFit, time_fit: Option<TimeFit>) -> RegularityReport {
    RegularityReport {
        s0: fit.s0_hat,
        time_fit,
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "spatial: s < {} (Fourier-decay proxy for W^{{s,inf}})", fmt_num(self.s0))?;
        if let (Some(tf), Some(b)) = (self.time_fit, self.spacetime_bound()) {
            write!(
                f,
                "\nspace-time: s < {} (sigma1 = {}, sigma2 = {})",
                fmt_num(b),
                fmt_num(tf.sigma1),
                fmt_num(tf.sigma2)
            )?;
        }
        Ok(())
    }
}
