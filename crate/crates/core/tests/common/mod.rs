#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trefftz_epw::linalg::CMatrix;
use trefftz_epw::mesh::Point;
use trefftz_epw::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Singular values by one-sided (Hestenes) Jacobi rotations, descending.
pub fn jacobi_singular_values(a: &CMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j).to_vec()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = (0..m).map(|i| cols[p][i].conj() * cols[q][i]).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-16 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                #[allow(clippy::needless_range_loop)]
                for i in 0..m {
                    let xp = cols[p][i];
                    let xq = cols[q][i] * phase.conj();
                    cols[p][i] = xp * c - xq * s;
                    cols[q][i] = (xp * s + xq * c) * phase;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn fd_grad(f: impl Fn(Point) -> C64, x: Point, h: f64) -> [C64; 2] {
    let dx = (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h);
    let dy = (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h);
    [dx, dy]
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn vec_rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

pub fn point_in_triangle(rng: &mut impl Rng, v: [Point; 3]) -> Point {
    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    [
        v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
        v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]),
    ]
}
