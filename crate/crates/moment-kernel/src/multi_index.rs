//! Multi-indices and the graded lexicographic order.
//!
//! Every matrix in this crate is laid out along one fixed total order on the
//! exponent tuples `α ∈ ℕ₀^d`: first by total degree `|α| = Σ α_j`, then,
//! within a degree, lexicographically on the tuple read left to right with
//! the smaller first entry ranked earlier, so in two variables
//! `(0,2) < (1,1) < (2,0)`. The order is a prefix of itself under raising the
//! degree bound, which lets a truncation of degree `N + 1` reuse the degree-N
//! block unchanged.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent tuple of a monomial `x^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(exponents))
    }

    pub fn zero(d: usize) -> Result<Self> {
        Self::new(vec![0; d])
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Total degree `|α|`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Largest single exponent, the "box" degree used by per-coordinate
    /// truncations.
    pub fn box_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Componentwise sum; addresses the Hankel entry `s_{α+β}`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: other.d(),
            });
        }
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Index supported on a single coordinate (`slot` is zero-based).
    pub fn single(d: usize, slot: usize, value: u32) -> Result<Self> {
        if slot >= d {
            return Err(Error::SlotOutOfRange { slot: slot + 1, d });
        }
        let mut e = vec![0; d];
        e[slot] = value;
        Self::new(e)
    }
}

/// Graded-lex comparison.
pub fn cmp_graded_lex(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.total_degree()
        .cmp(&b.total_degree())
        .then_with(|| a.exponents().cmp(b.exponents()))
}

/// All multi-indices with `|α| ≤ N` in graded-lex order, with the inverse
/// rank map.
#[derive(Clone, Debug)]
pub struct IndexOrder {
    d: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    ranks: HashMap<Vec<u32>, usize>,
}

/// Enumerate the graded-lex order for dimension `d` up to total degree `n`.
pub fn enumerate(d: usize, n: u32) -> Result<IndexOrder> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut indices = Vec::new();
    let mut current = vec![0u32; d];
    for degree in 0..=n {
        emit_degree(&mut indices, &mut current, 0, degree);
    }
    let ranks = indices
        .iter()
        .enumerate()
        .map(|(k, idx)| (idx.exponents().to_vec(), k))
        .collect();
    Ok(IndexOrder {
        d,
        max_degree: n,
        indices,
        ranks,
    })
}

// Fill slot..d with exponents summing to `remaining`, ascending in the first
// slot — exactly the within-degree tie-break.
fn emit_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, slot: usize, remaining: u32) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for v in 0..=remaining {
        current[slot] = v;
        emit_degree(out, current, slot + 1, remaining - v);
    }
    current[slot] = 0;
}

impl IndexOrder {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index(&self, rank: usize) -> &MultiIndex {
        &self.indices[rank]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    /// Position of `α` in the order.
    pub fn rank(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: alpha.d(),
            });
        }
        self.ranks
            .get(alpha.exponents())
            .copied()
            .ok_or_else(|| Error::DegreeOutOfRange {
                index: alpha.exponents().to_vec(),
                max_degree: self.max_degree,
            })
    }
}

/// binomial(n, k) as usize; sizes here are small.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}
