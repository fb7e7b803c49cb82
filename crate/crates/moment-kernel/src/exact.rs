//! Exact rational linear algebra: reduced row echelon form for rank and
//! null-space questions, and the LDLᵀ factorization that backs the exact
//! orthonormalization path.
//!
//! Everything here is over [`Rat`] and deterministic: pivots are chosen by
//! position, never by magnitude, since exact arithmetic needs no pivoting
//! for stability.

use num_traits::{One, Signed, Zero};

use crate::matrix::Mat;
use crate::scalar::Rat;

/// Rank and a basis of the (right) null space of a rational matrix.
///
/// Null vectors follow the standard echelon parametrization: one vector per
/// free column, with that free coordinate set to 1.
pub fn rank_nullspace(m: &Mat<Rat>) -> (usize, Vec<Vec<Rat>>) {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        // find a pivot at or below row r
        let mut pivot = None;
        for i in r..rows {
            if !a.get(i, c).is_zero() {
                pivot = Some(i);
                break;
            }
        }
        let Some(pi) = pivot else { continue };
        if pi != r {
            for j in 0..cols {
                let tmp = a.get(pi, j).clone();
                a.set(pi, j, a.get(r, j).clone());
                a.set(r, j, tmp);
            }
        }
        let inv = a.get(r, c).clone();
        for j in 0..cols {
            let v = a.get(r, j).clone() / inv.clone();
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i != r && !a.get(i, c).is_zero() {
                let f = a.get(i, c).clone();
                for j in 0..cols {
                    let v = a.get(i, j).clone() - f.clone() * a.get(r, j).clone();
                    a.set(i, j, v);
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let rank = pivot_cols.len();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a.get(row, free).clone();
        }
        basis.push(v);
    }
    (rank, basis)
}

/// Outcome of the exact LDLᵀ factorization of a symmetric rational matrix.
pub enum LdlOutcome {
    /// `H = L·diag(d)·Lᵀ` with `L` unit lower triangular and every `d_k > 0`.
    PositiveDefinite(ExactLdl),
    /// A zero pivot at `step`: the leading block is singular and
    /// `null_vector` (length `step + 1`, padded by the caller as needed)
    /// spans a kernel direction of that block.
    Degenerate {
        #[cfg_attr(not(test), allow(dead_code))]
        step: usize,
        null_vector: Vec<Rat>,
    },
    /// A negative pivot: the matrix is not positive semidefinite.
    Indefinite { step: usize, pivot: Rat },
}

pub struct ExactLdl {
    /// Unit lower-triangular factor.
    pub l: Mat<Rat>,
    /// Positive diagonal.
    pub d: Vec<Rat>,
}

/// Exact LDLᵀ of a symmetric matrix, stopping at the first nonpositive pivot.
pub fn ldl(h: &Mat<Rat>) -> LdlOutcome {
    let n = h.rows();
    assert_eq!(n, h.cols(), "ldl needs a square matrix");
    let mut l = Mat::filled(n, n, Rat::zero());
    let mut d: Vec<Rat> = Vec::with_capacity(n);
    for i in 0..n {
        l.set(i, i, Rat::one());
    }
    for j in 0..n {
        let mut dj = h.get(j, j).clone();
        for k in 0..j {
            dj -= l.get(j, k).clone() * l.get(j, k).clone() * d[k].clone();
        }
        if dj.is_zero() {
            // kernel direction of the leading (j+1)-block: solve Lᵀ w = e_j
            // over the leading block, where row j of L is completed first
            let mut w = vec![Rat::zero(); j + 1];
            w[j] = Rat::one();
            for i in (0..j).rev() {
                let mut acc = Rat::zero();
                for k in (i + 1)..=j {
                    acc += l.get(k, i).clone() * w[k].clone();
                }
                w[i] = -acc;
            }
            return LdlOutcome::Degenerate {
                step: j,
                null_vector: w,
            };
        }
        if dj.is_negative() {
            return LdlOutcome::Indefinite { step: j, pivot: dj };
        }
        for i in (j + 1)..n {
            let mut v = h.get(i, j).clone();
            for k in 0..j {
                v -= l.get(i, k).clone() * l.get(j, k).clone() * d[k].clone();
            }
            l.set(i, j, v / dj.clone());
        }
        d.push(dj);
    }
    LdlOutcome::PositiveDefinite(ExactLdl { l, d })
}

/// Inverse of a unit lower-triangular matrix, exactly.
pub fn unit_lower_inverse(l: &Mat<Rat>) -> Mat<Rat> {
    let n = l.rows();
    let mut inv = Mat::filled(n, n, Rat::zero());
    for i in 0..n {
        inv.set(i, i, Rat::one());
    }
    // forward-substitute each column of the identity
    for col in 0..n {
        for i in (col + 1)..n {
            let mut acc = Rat::zero();
            for k in col..i {
                acc += l.get(i, k).clone() * inv.get(k, col).clone();
            }
            inv.set(i, col, -acc);
        }
    }
    inv
}

impl ExactLdl {
    /// Solve `H x = b` through the factorization.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn solve(&self, b: &[Rat]) -> Vec<Rat> {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        // forward: L y = b
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let t = self.l.get(i, k).clone() * y[k].clone();
                y[i] -= t;
            }
        }
        // diagonal
        for i in 0..n {
            y[i] /= self.d[i].clone();
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = self.l.get(k, i).clone() * y[k].clone();
                y[i] -= t;
            }
        }
        y
    }

}

/// `a · b` for rational matrices.
#[cfg_attr(not(test), allow(dead_code))]
pub fn mat_mul(a: &Mat<Rat>, b: &Mat<Rat>) -> Mat<Rat> {
    assert_eq!(a.cols(), b.rows());
    Mat::from_fn(a.rows(), b.cols(), |i, j| {
        let mut acc = Rat::zero();
        for k in 0..a.cols() {
            acc += a.get(i, k).clone() * b.get(k, j).clone();
        }
        acc
    })
}

/// `a · v` for a rational matrix and vector.
pub fn mat_vec(a: &Mat<Rat>, v: &[Rat]) -> Vec<Rat> {
    assert_eq!(a.cols(), v.len());
    (0..a.rows())
        .map(|i| {
            let mut acc = Rat::zero();
            for k in 0..a.cols() {
                acc += a.get(i, k).clone() * v[k].clone();
            }
            acc
        })
        .collect()
}
