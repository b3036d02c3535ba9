//! Graded numbering of multi-indices `α ∈ ℤ_{≥0}^d`.
//!
//! Position 0 is the zero index and positions `1..=d` are the elementary
//! vectors in coordinate order. Inside a degree block the order is
//! lexicographic with earlier coordinates dominant, so `(2,0)` precedes
//! `(1,1)` which precedes `(0,2)`. A table for order `n` is always a prefix
//! of the table for order `n + 1`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// An exponent vector `α`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(alloc::vec![0; d])
    }

    pub fn unit(d: usize, k: usize) -> Self {
        let mut v = alloc::vec![0; d];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π α_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `γ ≤ α`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    c
}

/// `r_n = C(n + d, d)`, the number of `α` with `|α| ≤ n`.
pub fn jet_dimension(d: usize, n: usize) -> Result<usize> {
    let mut c: u128 = 1;
    for k in 1..=d as u128 {
        c = c.checked_mul(n as u128 + k).ok_or(Error::Overflow)? / k;
    }
    usize::try_from(c).map_err(|_| Error::Overflow)
}

/// Graded table of multi-indices up to a maximal total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexTable {
    d: usize,
    max_degree: usize,
    entries: Vec<MultiIndex>,
    /// `block_start[k]` is the position of the first index of degree `k`;
    /// the last element equals `entries.len()`.
    block_start: Vec<usize>,
    lookup: BTreeMap<MultiIndex, usize>,
}

/// Builds the graded numbering of `ℤ_{≥0}^d` through total degree `n`.
///
/// # Panics
/// If `d == 0`.
pub fn graded_numbering(d: usize, n: usize) -> MultiIndexTable {
    assert!(d >= 1, "dimension must be positive");
    let mut entries = Vec::new();
    let mut block_start = Vec::with_capacity(n + 2);
    for k in 0..=n {
        block_start.push(entries.len());
        let mut cur = alloc::vec![0u32; d];
        push_degree_block(&mut entries, &mut cur, 0, k as u32);
    }
    block_start.push(entries.len());
    let lookup = entries.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    MultiIndexTable { d, max_degree: n, entries, block_start, lookup }
}

fn push_degree_block(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        push_degree_block(out, cur, pos + 1, remaining - a);
    }
    cur[pos] = 0;
}

impl MultiIndexTable {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.entries[i]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Number of indices with total degree `≤ k`, i.e. `r_k`.
    pub fn count_through(&self, k: usize) -> usize {
        self.block_start[(k + 1).min(self.max_degree + 1)]
    }

    /// Positions of the indices with total degree exactly `k`.
    pub fn degree_block(&self, k: usize) -> core::ops::Range<usize> {
        self.block_start[k]..self.block_start[k + 1]
    }

    /// Degree of the index at position `i`.
    pub fn degree_of(&self, i: usize) -> usize {
        self.entries[i].degree() as usize
    }

    /// All `(i, j, k)` with `entries[i] + entries[j] = entries[k]` inside the table.
    pub fn product_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.entries.iter().enumerate() {
            let da = a.degree() as usize;
            let limit = self.count_through(self.max_degree - da);
            for (j, b) in self.entries[..limit].iter().enumerate() {
                let k = self.lookup[&a.add(b)];
                out.push((i, j, k));
            }
        }
        out
    }
}
