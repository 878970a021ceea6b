use crate::error::{domain, Result};
use crate::spectral::FreqVec;

/// Disjoint blocks covering `0..size`. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(size: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; size];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(domain(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= size {
                    return Err(domain(format!("index {i} outside 0..{size}")));
                }
                if block_of[i] != usize::MAX {
                    return Err(domain(format!("index {i} lies in two blocks")));
                }
                block_of[i] = b;
            }
        }
        if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(domain(format!("index {i} is in no block")));
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn singletons(size: usize) -> Self {
        Partition {
            blocks: (0..size).map(|i| vec![i]).collect(),
            block_of: (0..size).collect(),
        }
    }

    /// Consecutive blocks of the given sizes: `[2, 1]` gives `{0,1}, {2}`.
    pub fn contiguous(sizes: &[usize]) -> Self {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes.iter().filter(|&&s| s > 0) {
            blocks.push((start..start + s).collect());
            start += s;
        }
        Partition::new(start, blocks).expect("contiguous blocks cover their range")
    }

    /// `self` followed by `other` with indices shifted past `self`.
    pub fn concat(&self, other: &Partition) -> Partition {
        let shift = self.size();
        let nb = self.blocks.len();
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().map(|b| b.iter().map(|i| i + shift).collect()));
        let mut block_of = self.block_of.clone();
        block_of.extend(other.block_of.iter().map(|b| b + nb));
        Partition { blocks, block_of }
    }

    pub fn size(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub(crate) fn labels(&self) -> &[usize] {
        &self.block_of
    }
}

/// A set of disjoint unordered pairs over `0..size`, each stored as `(i, j)`
/// with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pairing {
    size: usize,
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(size: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; size];
        for p in pairs.iter_mut() {
            if p.0 == p.1 {
                return Err(domain(format!("pair ({}, {}) is reflexive", p.0, p.1)));
            }
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for i in [p.0, p.1] {
                if i >= size || std::mem::replace(&mut seen[i], true) {
                    return Err(domain(format!("index {i} is out of range or paired twice")));
                }
            }
        }
        pairs.sort_unstable();
        Ok(Pairing { size, pairs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of pairs `ℓ`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn unpaired(&self) -> Vec<usize> {
        let mut used = vec![false; self.size];
        for &(i, j) in &self.pairs {
            used[i] = true;
            used[j] = true;
        }
        (0..self.size).filter(|&i| !used[i]).collect()
    }

    pub fn respects(&self, partition: &Partition) -> bool {
        self.pairs.iter().all(|&(i, j)| partition.block_of(i) != partition.block_of(j))
    }

    /// Whether every pair carries opposite frequencies.
    pub fn admits(&self, freqs: &[FreqVec]) -> bool {
        self.pairs.iter().all(|&(i, j)| {
            freqs[i].0.iter().zip(&freqs[j].0).all(|(a, b)| a + b == 0)
        })
    }
}

/// `J! / (2^ℓ (J-2ℓ)! ℓ!)`, the number of `ℓ`-pairings of `J` points.
pub fn pairing_count(j: usize, ell: usize) -> u128 {
    if 2 * ell > j {
        return 0;
    }
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    fact(j) / (fact(j - 2 * ell) * fact(ell) << ell)
}

/// All pairings of `0..j` with exactly `ell` pairs and no pair inside a
/// block, in a fixed lexicographic order.
pub fn enumerate_pairings(j: usize, partition: &Partition, ell: usize) -> Result<Vec<Pairing>> {
    if partition.size() != j {
        return Err(domain(format!("partition covers {} indices, expected {j}", partition.size())));
    }
    if 2 * ell > j {
        return Err(domain(format!("cannot form {ell} pairs from {j} indices")));
    }
    let mut out = Vec::new();
    let mut used = vec![false; j];
    let mut pairs = Vec::with_capacity(ell);
    walk(0, j - 2 * ell, partition, &mut used, &mut pairs, &mut out);
    Ok(out)
}

fn walk(
    start: usize,
    free: usize,
    partition: &Partition,
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    out: &mut Vec<Pairing>,
) {
    let Some(i) = (start..used.len()).find(|&i| !used[i]) else {
        if free == 0 {
            out.push(Pairing {
                size: used.len(),
                pairs: pairs.clone(),
            });
        }
        return;
    };
    used[i] = true;
    for k in i + 1..used.len() {
        if used[k] || partition.block_of(i) == partition.block_of(k) {
            continue;
        }
        used[k] = true;
        pairs.push((i, k));
        walk(i + 1, free, partition, used, pairs, out);
        pairs.pop();
        used[k] = false;
    }
    if free > 0 {
        walk(i + 1, free - 1, partition, used, pairs, out);
    }
    used[i] = false;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_formula() {
        for j in 0..=10 {
            let part = Partition::singletons(j);
            for ell in 0..=j / 2 {
                let ps = enumerate_pairings(j, &part, ell).unwrap();
                assert_eq!(ps.len() as u128, pairing_count(j, ell), "J={j} l={ell}");
                let mut uniq = ps.clone();
                uniq.sort_by(|a, b| a.pairs.cmp(&b.pairs));
                uniq.dedup();
                assert_eq!(uniq.len(), ps.len());
            }
        }
        assert_eq!(pairing_count(4, 2), 3);
        assert_eq!(pairing_count(4, 1), 6);
        assert_eq!(pairing_count(3, 1), 3);
    }

    #[test]
    fn single_block_forbids_pairs() {
        let part = Partition::new(2, vec![vec![0, 1]]).unwrap();
        assert!(enumerate_pairings(2, &part, 1).unwrap().is_empty());
        assert_eq!(enumerate_pairings(2, &part, 0).unwrap().len(), 1);
    }

    #[test]
    fn block_pairings_respect_blocks() {
        let part = Partition::contiguous(&[2, 2, 1]);
        for ell in 0..=2 {
            for p in enumerate_pairings(5, &part, ell).unwrap() {
                assert!(p.respects(&part));
                assert_eq!(p.unpaired().len(), 5 - 2 * ell);
            }
        }
        assert_eq!(enumerate_pairings(4, &Partition::contiguous(&[2, 2]), 2).unwrap().len(), 2);
    }

    #[test]
    fn invalid_partitions() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 3]]).is_err());
        assert!(enumerate_pairings(3, &Partition::singletons(3), 2).is_err());
        assert!(enumerate_pairings(4, &Partition::singletons(3), 1).is_err());
        assert!(Pairing::new(3, vec![(1, 1)]).is_err());
        assert!(Pairing::new(3, vec![(0, 1), (1, 2)]).is_err());
    }

    #[test]
    fn admissible_tuples_match_definition() {
        let vals = [-1i64, 0, 1];
        for j in 2..=4usize {
            let part = Partition::singletons(j);
            for ell in 1..=j / 2 {
                for p in enumerate_pairings(j, &part, ell).unwrap() {
                    for code in 0..3usize.pow(j as u32) {
                        let freqs: Vec<FreqVec> =
                            (0..j).map(|i| FreqVec::from(vals[code / 3usize.pow(i as u32) % 3])).collect();
                        let expected = p.pairs().iter().all(|&(a, b)| freqs[a].0[0] == -freqs[b].0[0]);
                        assert_eq!(p.admits(&freqs), expected);
                    }
                }
            }
        }
    }
}
