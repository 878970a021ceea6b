use std::fmt;

use crate::error::{domain, Result};
use crate::spectral::Lattice;

/// One parameter set of the renormalized wave problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    pub d: usize,
    /// Degree of the nonlinearity.
    pub k: usize,
    /// Dispersion exponent.
    pub alpha: f64,
    /// Data regularity: `u0 ~ Σ g_n ⟨n⟩^{-β} e^{inx}`.
    pub beta: f64,
    /// Frequency cutoff `N`.
    pub cutoff: usize,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Sobolev index of the remainder.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            d: 1,
            k: 2,
            alpha: 0.5,
            beta: 0.4,
            cutoff: 64,
            horizon: 0.05,
            sigma: 0.2,
            seed: 0,
        }
    }
}

impl ParamSet {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.d, self.cutoff)
    }

    /// `β ≤ d/2`: the data is almost surely not a function.
    pub fn singular(&self) -> bool {
        self.beta <= self.d as f64 / 2.0
    }

    pub fn admissibility(&self) -> Admissibility {
        admissible_params(self.d, self.k, self.alpha, self.beta)
    }

    /// Numeric sanity of every field; admissibility is a separate question.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > 3 {
            return Err(domain(format!("d = {} must be 1, 2 or 3", self.d)));
        }
        if self.k < 1 {
            return Err(domain("k must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(domain(format!("alpha = {} must be positive", self.alpha)));
        }
        if !self.beta.is_finite() || !self.sigma.is_finite() {
            return Err(domain("beta and sigma must be finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(domain(format!("T = {} must be positive", self.horizon)));
        }
        Ok(())
    }
}

/// One of the inequalities an admissible parameter set must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `max(d/2 - d/(2k), d/2 - α/(2k)) < β`
    BetaLower,
    /// `β ≤ d/2`
    BetaUpper,
    /// `α > (k-1)(d/2 - (k-1)β/k)`
    Dispersion,
    /// `α > (k-1)d/2 - (k²-3k+3)β/(k-1)`, needed from `k = 3` on
    StrongDispersion,
    /// The window of admissible `σ` is empty.
    EmptyWindow,
}

impl Condition {
    pub fn inequality(&self) -> &'static str {
        match self {
            Condition::BetaLower => "beta > max(d/2 - d/(2k), d/2 - alpha/(2k))",
            Condition::BetaUpper => "beta <= d/2",
            Condition::Dispersion => "alpha > (k-1)(d/2 - (k-1)beta/k)",
            Condition::StrongDispersion => "alpha > (k-1)d/2 - (k^2-3k+3)beta/(k-1)",
            Condition::EmptyWindow => "sigma window nonempty",
        }
    }
}

/// A failed condition with both sides evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails: {} vs {}",
            self.condition.inequality(),
            fmt_num(self.lhs),
            fmt_num(self.rhs)
        )
    }
}

/// Admissible Sobolev indices: `lower < σ < upper`, or `lower ≤ σ` when
/// `lower_inclusive`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaWindow {
    pub lower: f64,
    pub lower_inclusive: bool,
    pub upper: f64,
}

impl SigmaWindow {
    pub fn contains(&self, sigma: f64) -> bool {
        let above = if self.lower_inclusive {
            sigma >= self.lower
        } else {
            sigma > self.lower
        };
        above && sigma < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }
}

impl fmt::Display for SigmaWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_inclusive { '[' } else { '(' };
        write!(f, "{open}{}, {})", fmt_num(self.lower), fmt_num(self.upper))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible(SigmaWindow),
    Rejected(Vec<Violation>),
}

impl Admissibility {
    pub fn window(&self) -> Option<SigmaWindow> {
        match self {
            Admissibility::Admissible(w) => Some(*w),
            Admissibility::Rejected(_) => None,
        }
    }

    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible(_))
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admissibility::Admissible(w) => write!(f, "admissible, sigma in {w}"),
            Admissibility::Rejected(v) => {
                write!(f, "rejected")?;
                for (i, x) in v.iter().enumerate() {
                    write!(f, "{} {x}", if i == 0 { ":" } else { ";" })?;
                }
                Ok(())
            }
        }
    }
}

/// Decide whether `(d, k, α, β)` is admissible and, if so, return the open
/// window of Sobolev indices `σ > 0` for the remainder. Every violated
/// condition is reported.
pub fn admissible_params(d: usize, k: usize, alpha: f64, beta: f64) -> Admissibility {
    let half = d as f64 / 2.0;
    let kf = k as f64;
    let mut bad = Vec::new();
    let beta_min = (half - half / kf).max(half - alpha / (2.0 * kf));
    if beta <= beta_min {
        bad.push(Violation {
            condition: Condition::BetaLower,
            lhs: beta,
            rhs: beta_min,
        });
    }
    if beta > half {
        bad.push(Violation {
            condition: Condition::BetaUpper,
            lhs: beta,
            rhs: half,
        });
    }
    let c1 = (kf - 1.0) * (half - (kf - 1.0) * beta / kf);
    if alpha <= c1 {
        bad.push(Violation {
            condition: Condition::Dispersion,
            lhs: alpha,
            rhs: c1,
        });
    }
    if k >= 3 {
        let c2 = (kf - 1.0) * half - (kf * kf - 3.0 * kf + 3.0) * beta / (kf - 1.0);
        if alpha <= c2 {
            bad.push(Violation {
                condition: Condition::StrongDispersion,
                lhs: alpha,
                rhs: c2,
            });
        }
    }
    let mut lower = 0.0;
    let mut lower_inclusive = false;
    let mut raise = |x: f64| {
        if x > lower || (x == lower && x > 0.0) {
            lower = x;
            lower_inclusive = x > 0.0;
        }
    };
    raise(half - alpha / (kf - 1.0).max(1.0));
    if k >= 3 {
        raise((kf - 1.0) / (kf - 2.0) * half - beta / (kf - 2.0) - alpha / (kf - 2.0));
    }
    let upper = alpha + (kf - 1.0) * (beta - half);
    let window = SigmaWindow {
        lower,
        lower_inclusive,
        upper,
    };
    if bad.is_empty() && window.is_empty() {
        bad.push(Violation {
            condition: Condition::EmptyWindow,
            lhs: lower,
            rhs: upper,
        });
    }
    if bad.is_empty() {
        Admissibility::Admissible(window)
    } else {
        Admissibility::Rejected(bad)
    }
}

/// Decimal rendering without binary noise: `0.4` rather than
/// `0.39999999999999997`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let a = admissible_params(1, 2, 0.5, 0.4);
        let w = a.window().unwrap();
        assert_eq!((w.lower, w.lower_inclusive), (0.0, false));
        assert!((w.upper - 0.4).abs() < 1e-15);
        assert_eq!(a.to_string(), "admissible, sigma in (0, 0.4)");

        let Admissibility::Rejected(v) = admissible_params(1, 2, 0.2, 0.4) else {
            panic!("alpha = 0.2 must be rejected")
        };
        assert!(v.iter().any(|x| x.condition == Condition::Dispersion && (x.rhs - 0.3).abs() < 1e-15));

        assert_eq!(admissible_params(2, 2, 1.0, 1.0).to_string(), "admissible, sigma in (0, 1)");
    }

    #[test]
    fn beta_above_half_dimension_is_rejected() {
        let Admissibility::Rejected(v) = admissible_params(1, 2, 0.5, 0.6) else {
            panic!()
        };
        assert!(v.iter().any(|x| x.condition == Condition::BetaUpper));
    }

    #[test]
    fn cubic_checks_both_dispersion_bounds() {
        // thresholds 2(1/2 - 2β/3) ≈ 0.373 and 1 - 3β/2 = 0.295
        let Admissibility::Rejected(v) = admissible_params(1, 3, 0.29, 0.47) else {
            panic!()
        };
        let conds: Vec<Condition> = v.iter().map(|x| x.condition).collect();
        assert_eq!(conds, vec![Condition::Dispersion, Condition::StrongDispersion]);
        let strong = &v[1];
        assert!((strong.rhs - 0.295).abs() < 1e-15);
        let a = admissible_params(1, 3, 0.9, 0.45);
        let w = a.window().unwrap();
        assert!((w.lower - 0.05).abs() < 1e-15 && w.lower_inclusive);
        assert!((w.upper - 0.8).abs() < 1e-15);
    }

    #[test]
    fn strong_bound_is_implied_for_positive_beta() {
        for k in 3..8 {
            for b in 1..20 {
                let beta = b as f64 * 0.05;
                let kf = k as f64;
                let c1 = (kf - 1.0) * (0.5 - (kf - 1.0) * beta / kf);
                let c2 = (kf - 1.0) * 0.5 - (kf * kf - 3.0 * kf + 3.0) * beta / (kf - 1.0);
                assert!((c1 - c2 - beta / (kf * (kf - 1.0))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.5 + (0.4 - 0.5)), "0.4");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(-1.25), "-1.25");
    }
}
