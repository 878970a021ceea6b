use std::fmt;

use crate::error::{domain, Result};
use crate::Scalar;

/// A lattice frequency `n ∈ Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreqVec(pub Vec<i64>);

impl FreqVec {
    pub fn new(components: impl Into<Vec<i64>>) -> Self {
        FreqVec(components.into())
    }

    pub fn zero(d: usize) -> Self {
        FreqVec(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        FreqVec(self.0.iter().map(|c| -c).collect())
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    /// Largest absolute coordinate.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn bracket(&self) -> f64 {
        bracket(&self.0)
    }
}

impl fmt::Display for FreqVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl From<i64> for FreqVec {
    fn from(n: i64) -> Self {
        FreqVec(vec![n])
    }
}

/// Japanese bracket `⟨n⟩ = sqrt(1 + |n|^2)`.
pub fn bracket(n: &[i64]) -> f64 {
    let sq: f64 = n.iter().map(|&c| (c as f64) * (c as f64)).sum();
    (1.0 + sq).sqrt()
}

/// Japanese bracket in an arbitrary scalar type.
pub fn bracket_in<T: Scalar>(n: &[i64]) -> T {
    let sq = n.iter().fold(T::zero(), |acc, &c| {
        let c = T::of(c as f64);
        acc + c * c
    });
    (T::one() + sq).sqrt()
}

/// The frequency box `[-N, N]^d`, enumerated lexicographically with the
/// first coordinate most significant.
///
/// With this order `index(-n) = len - 1 - index(n)`, and the indices above
/// the centre are exactly the frequencies whose first nonzero coordinate is
/// positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    d: usize,
    cutoff: usize,
}

impl Lattice {
    pub fn new(d: usize, cutoff: usize) -> Result<Self> {
        if d == 0 {
            return Err(domain("lattice dimension must be at least 1"));
        }
        let side = 2 * cutoff as u128 + 1;
        let len = (0..d).try_fold(1u128, |acc, _| acc.checked_mul(side));
        match len {
            Some(l) if l <= (1u128 << 40) => Ok(Lattice { d, cutoff }),
            _ => Err(domain(format!("lattice d={d}, N={cutoff} is too large"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the zero frequency.
    pub fn center(&self) -> usize {
        self.len() / 2
    }

    /// Same dimension, different cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Lattice {
        Lattice { d: self.d, cutoff }
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.len() == self.d && n.iter().all(|c| c.unsigned_abs() as usize <= self.cutoff)
    }

    pub fn index(&self, n: &[i64]) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let side = self.side() as i64;
        let off = self.cutoff as i64;
        Some(n.iter().fold(0i64, |acc, &c| acc * side + (c + off)) as usize)
    }

    pub fn freq(&self, index: usize) -> FreqVec {
        let mut out = vec![0i64; self.d];
        self.write_freq(index, &mut out);
        FreqVec(out)
    }

    /// Writes the frequency at `index` into `out` without allocating.
    pub fn write_freq(&self, mut index: usize, out: &mut [i64]) {
        let side = self.side();
        for slot in out.iter_mut().rev() {
            *slot = (index % side) as i64 - self.cutoff as i64;
            index /= side;
        }
    }

    pub fn neg_index(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    /// True when the first nonzero coordinate of `freq(index)` is positive.
    pub fn in_half(&self, index: usize) -> bool {
        index > self.center()
    }

    pub fn iter(&self) -> impl Iterator<Item = FreqVec> + '_ {
        (0..self.len()).map(move |i| self.freq(i))
    }

    /// `⟨n⟩` for every lattice point, in enumeration order.
    pub fn brackets<T: Scalar>(&self) -> Vec<T> {
        let mut buf = vec![0i64; self.d];
        (0..self.len())
            .map(|i| {
                self.write_freq(i, &mut buf);
                bracket_in::<T>(&buf)
            })
            .collect()
    }

    /// Maps every index of `self` to the index of the same frequency in
    /// `other`, or `None` when it falls outside `other`.
    pub fn reindex_into(&self, other: &Lattice) -> Vec<Option<usize>> {
        let mut buf = vec![0i64; self.d];
        (0..self.len())
            .map(|i| {
                self.write_freq(i, &mut buf);
                other.index(&buf)
            })
            .collect()
    }
}
