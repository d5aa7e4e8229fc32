//! LU factorization with partial pivoting.
//!
//! The factorization is identical to dense partial-pivoting LU; it only
//! skips work that is provably zero for a matrix with lower bandwidth `kl`
//! and upper bandwidth `ku` (after pivoting the upper bandwidth grows to at
//! most `kl + ku`). Row interchanges are not applied to already computed
//! multiplier columns, so the forward solve replays them in order.

use num_complex::Complex64 as C64;

use super::{axpy, CMatrix};
use crate::error::LinalgError;

const PANEL: usize = 48;

#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: CMatrix,
    piv: Vec<usize>,
    kl: usize,
    ku: usize,
}

/// Lower and upper bandwidth of the nonzero pattern of a square matrix.
pub fn bandwidths(a: &CMatrix) -> (usize, usize) {
    let zero = C64::new(0.0, 0.0);
    let (mut kl, mut ku) = (0, 0);
    for j in 0..a.cols() {
        for (i, z) in a.col(j).iter().enumerate() {
            if *z != zero {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
    }
    (kl, ku)
}

impl LuFactors {
    /// Factors a square matrix whose nonzeros lie within the given bands.
    /// Passing `kl = ku = n - 1` gives plain dense LU.
    pub fn factor(mut a: CMatrix, kl: usize, ku: usize) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::Shape(format!("LU needs a square matrix, got {:?}", a.shape())));
        }
        if !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let kl = kl.min(n.saturating_sub(1));
        let ku = (kl + ku).min(n.saturating_sub(1));
        let mut piv = vec![0; n];

        let mut j0 = 0;
        while j0 < n {
            let jend = (j0 + PANEL).min(n);
            // panel factorization
            for j in j0..jend {
                let rmax = (j + kl + 1).min(n);
                let col = &a.col(j)[j..rmax];
                let (off, best) = col
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |(bi, bv), (i, z)| {
                        let v = z.norm();
                        if v > bv {
                            (i, v)
                        } else {
                            (bi, bv)
                        }
                    });
                if best == 0.0 {
                    return Err(LinalgError::Singular { column: j });
                }
                let p = j + off;
                piv[j] = p;
                let cmax = (j + ku + 1).min(n);
                let cpanel = jend.min(cmax);
                if p != j {
                    for c in j..cpanel {
                        let col = a.col_mut(c);
                        col.swap(j, p);
                    }
                }
                let inv = a[(j, j)].inv();
                for z in &mut a.col_mut(j)[j + 1..rmax] {
                    *z *= inv;
                }
                for c in j + 1..cpanel {
                    let ujc = a[(j, c)];
                    if ujc == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let (lcol, ccol) = a.two_cols_mut(j, c);
                    axpy(&mut ccol[j + 1..rmax], -ujc, &lcol[j + 1..rmax]);
                }
            }
            // trailing columns reached by the panel: interchanges and updates
            // in the same order as the unblocked algorithm
            let cend = (jend - 1 + ku + 1).min(n);
            for c in jend..cend {
                for j in j0..jend {
                    if c > j + ku {
                        continue;
                    }
                    if piv[j] != j {
                        a.col_mut(c).swap(j, piv[j]);
                    }
                    let ujc = a[(j, c)];
                    if ujc == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let rmax = (j + kl + 1).min(n);
                    let (lcol, ccol) = a.two_cols_mut(j, c);
                    axpy(&mut ccol[j + 1..rmax], -ujc, &lcol[j + 1..rmax]);
                }
            }
            j0 = jend;
        }
        Ok(LuFactors { lu: a, piv, kl, ku })
    }

    pub fn dim(&self) -> usize {
        self.piv.len()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            let rmax = (j + self.kl + 1).min(n);
            axpy(&mut x[j + 1..rmax], -xj, &self.lu.col(j)[j + 1..rmax]);
        }
        for j in (0..n).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            let lo = j.saturating_sub(self.ku);
            axpy(&mut x[lo..j], -xj, &self.lu.col(j)[lo..j]);
        }
        x
    }

    /// Smallest and largest pivot modulus, a cheap conditioning hint.
    pub fn pivot_range(&self) -> (f64, f64) {
        (0..self.dim()).fold((f64::INFINITY, 0.0f64), |(lo, hi), j| {
            let v = self.lu[(j, j)].norm();
            (lo.min(v), hi.max(v))
        })
    }
}
