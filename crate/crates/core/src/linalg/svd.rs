//! Thin SVD of a tall complex matrix.
//!
//! Householder bidiagonalization `A = Q B P^*`, a diagonal phase rescaling
//! that makes `B` real and nonnegative, then Golub-Kahan implicit-shift QR
//! sweeps on the real bidiagonal with the rotations accumulated into the
//! complex singular vectors.

use num_complex::Complex64 as C64;

use super::{axpy, dotc, CMatrix};
use crate::error::LinalgError;

const MAX_SWEEPS: usize = 75;

/// `A = U diag(s) V^*` with `U` of shape `m x n`, `V` of shape `n x n` and
/// `s` sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            for z in us.col_mut(j) {
                *z *= sj;
            }
        }
        us.matmul(&self.v.adjoint()).expect("consistent SVD shapes")
    }
}

/// Hermitian reflector `H = I - beta v v^*` with `H x = alpha e_1`.
fn householder(x: &[C64]) -> (Vec<C64>, f64, C64) {
    let norm = super::norm2(x);
    let mut v = x.to_vec();
    if norm == 0.0 {
        return (v, 0.0, C64::new(0.0, 0.0));
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    v[0] += phase * norm;
    let beta = 1.0 / (norm * (norm + x0.norm()));
    (v, beta, -phase * norm)
}

fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

#[inline]
fn rotate_cols(mat: &mut CMatrix, a: usize, b: usize, c: f64, s: f64) {
    // (col_a, col_b) <- (c col_a + s col_b, c col_b - s col_a)
    let (ca, cb) = mat.two_cols_mut(a, b);
    for (y, z) in ca.iter_mut().zip(cb.iter_mut()) {
        let (yy, zz) = (*y, *z);
        *y = yy * c + zz * s;
        *z = zz * c - yy * s;
    }
}

pub fn svd(a: &CMatrix) -> Result<Svd, LinalgError> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(LinalgError::Shape(format!(
            "svd needs rows >= cols >= 1, got {m}x{n}"
        )));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    // --- bidiagonalization ---
    let mut w = a.clone();
    let mut diag = vec![C64::new(0.0, 0.0); n];
    let mut sup = vec![C64::new(0.0, 0.0); n];
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n.saturating_sub(1));
    let mut t = vec![C64::new(0.0, 0.0); m];
    for k in 0..n {
        let (v, beta, alpha) = householder(&w.col(k)[k..]);
        diag[k] = alpha;
        if beta != 0.0 {
            for j in k + 1..n {
                let col = &mut w.col_mut(j)[k..];
                let s = dotc(&v, col);
                axpy(col, -s * beta, &v);
            }
        }
        left.push((v, beta));

        if k + 1 < n {
            let y: Vec<C64> = (k + 1..n).map(|j| w[(k, j)].conj()).collect();
            let (v, beta, gamma) = householder(&y);
            sup[k] = gamma.conj();
            if beta != 0.0 && k + 1 < m {
                let t = &mut t[..m - k - 1];
                t.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for (jj, j) in (k + 1..n).enumerate() {
                    axpy(t, v[jj], &w.col(j)[k + 1..]);
                }
                for (jj, j) in (k + 1..n).enumerate() {
                    axpy(&mut w.col_mut(j)[k + 1..], -v[jj].conj() * beta, t);
                }
            }
            right.push((v, beta));
        }
    }

    // --- accumulate Q[:, :n] and P ---
    let mut u = CMatrix::from_diag(m, n, &vec![1.0; n]);
    for k in (0..n).rev() {
        let (v, beta) = &left[k];
        if *beta == 0.0 {
            continue;
        }
        for j in k..n {
            let col = &mut u.col_mut(j)[k..];
            let s = dotc(v, col);
            axpy(col, -s * *beta, v);
        }
    }
    let mut vmat = CMatrix::identity(n);
    for k in (0..n.saturating_sub(1)).rev() {
        let (v, beta) = &right[k];
        if *beta == 0.0 {
            continue;
        }
        for j in k + 1..n {
            let col = &mut vmat.col_mut(j)[k + 1..];
            let s = dotc(v, col);
            axpy(col, -s * *beta, v);
        }
    }

    // --- make the bidiagonal real and nonnegative ---
    let mut wdiag = vec![0.0; n];
    let mut rv1 = vec![0.0; n];
    let mut r_phase = C64::new(1.0, 0.0);
    for i in 0..n {
        for z in vmat.col_mut(i) {
            *z *= r_phase;
        }
        let l_phase = unit_phase(diag[i] * r_phase);
        for z in u.col_mut(i) {
            *z *= l_phase;
        }
        wdiag[i] = diag[i].norm();
        if i + 1 < n {
            r_phase = unit_phase(l_phase * sup[i].conj());
            rv1[i + 1] = sup[i].norm();
        }
    }

    bidiagonal_qr(&mut wdiag, &mut rv1, &mut u, &mut vmat)?;

    // --- sort descending ---
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| wdiag[j].total_cmp(&wdiag[i]));
    let s = order.iter().map(|&i| wdiag[i]).collect();
    let u = CMatrix::from_fn(m, n, |i, j| u[(i, order[j])]);
    let v = CMatrix::from_fn(n, n, |i, j| vmat[(i, order[j])]);
    Ok(Svd { u, s, v })
}

/// Implicit-shift QR on the real upper bidiagonal with diagonal `w` and
/// superdiagonal `rv1` (`rv1[i]` couples columns `i-1` and `i`, `rv1[0] = 0`).
fn bidiagonal_qr(
    w: &mut [f64],
    rv1: &mut [f64],
    u: &mut CMatrix,
    v: &mut CMatrix,
) -> Result<(), LinalgError> {
    let n = w.len();
    let anorm = w
        .iter()
        .zip(rv1.iter())
        .fold(0.0f64, |acc, (a, b)| acc.max(a.abs() + b.abs()));
    let tol = f64::EPSILON * anorm;

    for k in (0..n).rev() {
        let mut sweeps = 0;
        loop {
            // find the start l of the unreduced block ending at k
            let mut l = k;
            let mut cancel = true;
            loop {
                if l == 0 || rv1[l].abs() <= tol {
                    cancel = false;
                    break;
                }
                if w[l - 1].abs() <= tol {
                    break;
                }
                l -= 1;
            }
            if cancel {
                // w[l-1] is negligible: chase rv1[l] out of the block
                let nm = l - 1;
                let (mut c, mut s) = (0.0, 1.0);
                for i in l..=k {
                    let f = s * rv1[i];
                    rv1[i] *= c;
                    if f.abs() <= tol {
                        break;
                    }
                    let g = w[i];
                    let h = f.hypot(g);
                    w[i] = h;
                    c = g / h;
                    s = -f / h;
                    rotate_cols(u, nm, i, c, s);
                }
            }
            let z = w[k];
            if l == k {
                if z < 0.0 {
                    w[k] = -z;
                    for e in v.col_mut(k) {
                        *e = -*e;
                    }
                }
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(LinalgError::NoConvergence {
                    index: k,
                    iterations: sweeps,
                });
            }
            sweeps += 1;

            // Wilkinson-type shift from the trailing 2x2
            let mut x = w[l];
            let nm = k - 1;
            let mut y = w[nm];
            let mut g = rv1[nm];
            let mut h = rv1[k];
            let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = f.hypot(1.0);
            f = ((x - z) * (x + z) + h * ((y / (f + g.copysign(f))) - h)) / x;

            let (mut c, mut s) = (1.0, 1.0);
            for j in l..=nm {
                let i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g *= c;
                let mut zz = f.hypot(h);
                rv1[j] = zz;
                c = f / zz;
                s = h / zz;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                rotate_cols(v, j, i, c, s);
                zz = f.hypot(h);
                w[j] = zz;
                if zz != 0.0 {
                    c = f / zz;
                    s = h / zz;
                }
                f = c * g + s * y;
                x = c * y - s * g;
                rotate_cols(u, j, i, c, s);
            }
            rv1[l] = 0.0;
            rv1[k] = f;
            w[k] = x;
        }
    }
    Ok(())
}
