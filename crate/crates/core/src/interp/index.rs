use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Degree vector `ν ∈ N_0^J`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, j: usize) -> Self {
        let mut v = vec![0; dim];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&d| d as u64).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `ν + e_j`.
    pub fn raised(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += 1;
        MultiIndex(v)
    }

    /// `ν - e_j`, if `ν_j >= 1`.
    pub fn lowered(&self, j: usize) -> Option<Self> {
        (self.0[j] > 0).then(|| {
            let mut v = self.0.clone();
            v[j] -= 1;
            MultiIndex(v)
        })
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Number of indices `μ <= ν`.
    pub fn box_size(&self) -> u128 {
        self.0.iter().map(|&d| d as u128 + 1).product()
    }

    /// `(coordinate, degree)` of the nonzero entries.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &d)| d > 0).map(|(j, &d)| (j, d))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Ordered downward-closed index set; the first element is `0`.
#[derive(Clone, Debug, Default)]
pub struct LowerSet {
    order: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl LowerSet {
    pub fn new(dim: usize) -> Self {
        let mut s = Self::default();
        s.order.push(MultiIndex::zero(dim));
        s.position.insert(MultiIndex::zero(dim), 0);
        s
    }

    /// Accepts `indices` only if every prefix is itself lower.
    pub fn from_ordered(indices: Vec<MultiIndex>) -> Result<Self> {
        let Some(first) = indices.first() else {
            return Err(Error::NotLower("empty index set".into()));
        };
        let dim = first.dim();
        let mut s = LowerSet { order: Vec::with_capacity(indices.len()), position: HashMap::new() };
        for nu in indices {
            if nu.dim() != dim {
                return Err(Error::Dimension { expected: dim, got: nu.dim() });
            }
            if s.contains(&nu) {
                return Err(Error::NotLower(format!("{nu:?} repeated")));
            }
            if !s.admits(&nu) {
                return Err(Error::NotLower(format!("{nu:?} precedes one of its lower neighbors")));
            }
            s.position.insert(nu.clone(), s.order.len());
            s.order.push(nu);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.order[0].dim()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.order
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.position.contains_key(nu)
    }

    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.position.get(nu).copied()
    }

    /// True when `ν ∉ Λ` and `ν - e_j ∈ Λ` for every `j` with `ν_j >= 1`.
    pub fn admits(&self, nu: &MultiIndex) -> bool {
        !self.contains(nu)
            && (0..nu.dim()).all(|j| nu.lowered(j).is_none_or(|m| self.contains(&m)))
    }

    pub(crate) fn push_unchecked(&mut self, nu: MultiIndex) {
        self.position.insert(nu.clone(), self.order.len());
        self.order.push(nu);
    }

    /// Downward-closure check over the whole set.
    pub fn is_lower(&self) -> bool {
        self.order.iter().all(|nu| (0..nu.dim()).all(|j| nu.lowered(j).is_none_or(|m| self.contains(&m))))
    }
}

/// The neighbor frontier `N(Λ)`, sorted lexicographically.
pub fn neighbors(set: &LowerSet) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = set
        .indices()
        .iter()
        .flat_map(|nu| (0..nu.dim()).map(move |j| nu.raised(j)))
        .filter(|mu| set.admits(mu))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `{ν ∈ N_0^J : |ν|_1 <= w}` in lexicographic order.
pub fn iso_set(dim: usize, w: u32) -> LowerSet {
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos == cur.len() {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for d in 0..=left {
            cur[pos] = d;
            rec(pos + 1, left - d, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, w, &mut cur, &mut out);
    LowerSet::from_ordered(out).expect("lexicographic order of a lower set is admissible")
}
