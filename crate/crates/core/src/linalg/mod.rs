//! Dense complex matrices, SVD and LU.
//!
//! Storage is column-major throughout: Householder reflectors, Givens
//! rotations and the LU trailing update all sweep whole columns.

mod lu;
mod svd;

pub use lu::{bandwidths, LuFactors};
pub use svd::{svd, Svd};

use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

use crate::error::LinalgError;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major nested data (convenient in tests).
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        Self::from_fn(nr, nc, |i, j| rows[i][j])
    }

    /// Diagonal matrix of shape `rows x cols` with real `diag` entries.
    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct columns borrowed mutably at once.
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [C64], &mut [C64]) {
        assert!(a != b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            (&mut hi[..r], &mut lo[b * r..(b + 1) * r])
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape(format!(
                "{:?} - {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{:?} * {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = out.col_mut(j);
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == C64::new(0.0, 0.0) {
                    continue;
                }
                axpy(oc, b, &self.data[k * self.rows..(k + 1) * self.rows]);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            axpy(&mut y, xj, self.col(j));
        }
        y
    }

    /// `A^* x`.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dotc(self.col(j), x)).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `y += a x`
#[inline]
pub fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    debug_assert_eq!(y.len(), x.len());
    let (ar, ai) = (a.re, a.im);
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.re += ar * xi.re - ai * xi.im;
        yi.im += ar * xi.im + ai * xi.re;
    }
}

/// Conjugated dot product `x^* y`.
#[inline]
pub fn dotc(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    let (mut re, mut im) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        re += a.re * b.re + a.im * b.im;
        im += a.re * b.im - a.im * b.re;
    }
    C64::new(re, im)
}

pub fn norm2(x: &[C64]) -> f64 {
    // scaled to survive entries near the overflow threshold
    let scale = x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}
