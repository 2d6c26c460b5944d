//! Subsets of a finite ground set `{0, 1, .., n-1}`.
//!
//! A [`SubsetIndex`] is a strictly increasing list of 0-based indices. It
//! serves three roles: a point configuration of the process, a label for a
//! Fock basis vector, and a window for kernel restriction. Serialized form is
//! a sorted JSON integer array; the compact string form is comma-separated
//! indices ("0,2,3", empty string for the empty set).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sorted, duplicate-free set of ground-set indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsetIndex {
    indices: Vec<usize>,
}

impl SubsetIndex {
    /// Builds a subset from arbitrary indices, sorting and deduplicating.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SubsetIndex { indices }
    }

    pub fn empty() -> Self {
        SubsetIndex {
            indices: Vec::new(),
        }
    }

    pub fn singleton(index: usize) -> Self {
        SubsetIndex {
            indices: vec![index],
        }
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        SubsetIndex {
            indices: (0..n).collect(),
        }
    }

    /// Decodes a bitmask (bit `i` set means index `i` is a member).
    pub fn from_bitmask(bits: u64) -> Self {
        SubsetIndex {
            indices: (0..64).filter(|i| bits >> i & 1 == 1).collect(),
        }
    }

    /// Encodes the subset as a bitmask. All indices must be below 64.
    pub fn bitmask(&self) -> u64 {
        self.indices.iter().fold(0u64, |acc, &i| {
            debug_assert!(i < 64);
            acc | 1 << i
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Errors with `IndexOutOfRange` unless every index is below `n`.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= n => Err(Error::IndexOutOfRange { index: max, n }),
            _ => Ok(()),
        }
    }

    /// Complement within the ground set `{0, .., n-1}`.
    pub fn complement(&self, n: usize) -> Self {
        SubsetIndex {
            indices: (0..n).filter(|&i| !self.contains(i)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &SubsetIndex) -> bool {
        self.indices.iter().all(|&i| !other.contains(i))
    }

    pub fn is_superset(&self, other: &SubsetIndex) -> bool {
        other.indices.iter().all(|&i| self.contains(i))
    }

    pub fn union(&self, other: &SubsetIndex) -> Self {
        let mut v = self.indices.clone();
        v.extend_from_slice(&other.indices);
        SubsetIndex::new(v)
    }

    /// Position of this subset in the fixed Fock basis order: subsets sorted
    /// by (cardinality, lexicographic on the sorted index list).
    pub fn fock_rank(&self, n: usize) -> usize {
        let binom = binomial_table(n);
        let m = self.len();
        let mut rank: usize = (0..m).map(|k| binom[n][k]).sum();
        // lexicographic rank among m-subsets
        let mut prev: isize = -1;
        for (i, &s) in self.indices.iter().enumerate() {
            for c in (prev + 1) as usize..s {
                rank += binom[n - 1 - c][m - 1 - i];
            }
            prev = s as isize;
        }
        rank
    }
}

impl From<SubsetIndex> for Vec<usize> {
    fn from(s: SubsetIndex) -> Self {
        s.indices
    }
}

impl TryFrom<Vec<usize>> for SubsetIndex {
    type Error = String;

    fn try_from(v: Vec<usize>) -> std::result::Result<Self, String> {
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err("subset indices must be strictly increasing".to_string());
        }
        Ok(SubsetIndex { indices: v })
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.indices {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for SubsetIndex {
    type Err = Error;

    /// Parses the compact form "0,2,3"; the empty string is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SubsetIndex::empty());
        }
        let mut indices = Vec::new();
        for tok in s.split(',') {
            let idx: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("invalid subset index {tok:?}")))?;
            indices.push(idx);
        }
        Ok(SubsetIndex::new(indices))
    }
}

/// All subsets of `{0, .., n-1}` in Fock basis order (size, then lex).
pub fn fock_basis_order(n: usize) -> Vec<SubsetIndex> {
    assert!(n < 64, "ground set too large for bitmask enumeration");
    let mut all: Vec<SubsetIndex> = (0u64..1 << n).map(SubsetIndex::from_bitmask).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Pascal's triangle up to row `n`, with `binom[a][b] = 0` when `b > a`.
fn binomial_table(n: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; n + 1]; n + 1];
    for a in 0..=n {
        t[a][0] = 1;
        for b in 1..=a {
            t[a][b] = t[a - 1][b - 1] + if b <= a - 1 { t[a - 1][b] } else { 0 };
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_dedups() {
        let s = SubsetIndex::new(vec![3, 1, 3, 0]);
        assert_eq!(s.indices(), &[0, 1, 3]);
        assert_eq!(s.to_string(), "0,1,3");
    }

    #[test]
    fn bitmask_round_trip() {
        for bits in 0u64..64 {
            assert_eq!(SubsetIndex::from_bitmask(bits).bitmask(), bits);
        }
    }

    #[test]
    fn parse_and_display() {
        let s: SubsetIndex = "0,2".parse().unwrap();
        assert_eq!(s.indices(), &[0, 2]);
        let e: SubsetIndex = "".parse().unwrap();
        assert!(e.is_empty());
        assert!("0,x".parse::<SubsetIndex>().is_err());
    }

    #[test]
    fn range_check() {
        let s = SubsetIndex::new(vec![0, 4]);
        assert!(s.check_range(5).is_ok());
        assert!(matches!(
            s.check_range(4),
            Err(Error::IndexOutOfRange { index: 4, n: 4 })
        ));
    }

    #[test]
    fn fock_order_is_size_then_lex() {
        let order = fock_basis_order(3);
        let as_strings: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            as_strings,
            vec!["", "0", "1", "2", "0,1", "0,2", "1,2", "0,1,2"]
        );
        for (pos, s) in order.iter().enumerate() {
            assert_eq!(s.fock_rank(3), pos);
        }
    }

    #[test]
    fn fock_rank_matches_enumeration() {
        for n in 0..=8 {
            for (pos, s) in fock_basis_order(n).iter().enumerate() {
                assert_eq!(s.fock_rank(n), pos, "n={n} subset={s}");
            }
        }
    }

    #[test]
    fn serde_rejects_unsorted() {
        let ok: SubsetIndex = serde_json::from_str("[0,2,3]").unwrap();
        assert_eq!(ok.len(), 3);
        assert!(serde_json::from_str::<SubsetIndex>("[2,0]").is_err());
        assert!(serde_json::from_str::<SubsetIndex>("[1,1]").is_err());
    }
}
