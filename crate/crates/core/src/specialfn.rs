//! Special functions: the segment exponential integral `phi0`, integer-order
//! Bessel functions of the first kind, `Y_0`, `Y_1`, the Hankel functions
//! `H_0^(1)`, `H_1^(1)` and the 2D Helmholtz fundamental solution.
//!
//! Method summary:
//! * `J_m`: ascending series where its terms decrease monotonically
//!   (`x^2 <= 4(m+1)`), otherwise Miller's downward recurrence normalized by
//!   `J_0 + 2 sum J_2k = 1`; for `m <= 1` and large `x` the Hankel expansion.
//! * `Y_0`, `Y_1` below the crossover: Neumann series over Miller-generated
//!   `J_k` (no cancellation, unlike the power series). Above: Hankel
//!   asymptotic expansion in modulus/phase form.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::SpecialFnError;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument `Y_0, Y_1` (and `J_0, J_1`) use Miller/Neumann
/// series; above it the Hankel asymptotic expansion. The expansion's
/// smallest term near `x` is about `exp(-2x)`, so it reaches full double
/// precision only for `x` in the mid twenties.
pub const ASYMPTOTIC_CROSSOVER: f64 = 25.0;

const PHI0_TAYLOR_RADIUS: f64 = 1e-3;

/// `(e^a - 1) / a`, i.e. `int_0^1 e^{a t} dt`, entire in `a`.
pub fn phi0(a: C64) -> C64 {
    if a.norm() < PHI0_TAYLOR_RADIUS {
        phi0_taylor(a)
    } else {
        phi0_direct(a)
    }
}

fn phi0_taylor(a: C64) -> C64 {
    // sum_{k=0}^{12} a^k / (k+1)!
    let mut coef = [0.0; 13];
    let mut f = 1.0;
    for (k, c) in coef.iter_mut().enumerate() {
        f *= (k + 1) as f64;
        *c = 1.0 / f;
    }
    let mut acc = C64::new(coef[12], 0.0);
    for &c in coef[..12].iter().rev() {
        acc = acc * a + c;
    }
    acc
}

fn phi0_direct(a: C64) -> C64 {
    // e^a - 1 without cancellation in the real part
    let (x, y) = (a.re, a.im);
    let half = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half * half;
    let im = x.exp() * y.sin();
    C64::new(re, im) / a
}

fn bessel_j_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut t = 1.0;
    for k in 1..=m {
        t *= half / k as f64;
    }
    if t == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut sum = t;
    let mut k = 0u32;
    loop {
        k += 1;
        t *= q / (k as f64 * (k + m) as f64);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() || k > 500 {
            break;
        }
    }
    sum
}

/// Starting index for Miller's recurrence that leaves `J_N / J_m` below
/// double precision.
fn miller_start(m: u32, x: f64) -> usize {
    let top = (m as f64).max(x).max(1.0);
    let n = top + (160.0 * top).sqrt() + 20.0;
    let n = n.ceil() as usize;
    n + (n & 1)
}

/// `J_0(x) ..= J_nmax(x)` by Miller's algorithm, `x > 0`.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0);
    let start = miller_start(nmax as u32, x).max(nmax + 2);
    let mut out = vec![0.0; nmax + 1];
    let (mut jp1, mut j) = (0.0f64, 1e-30f64);
    let mut sum = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        // j = J_k, jp1 = J_{k+1}  ->  J_{k-1}
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut().skip(idx) {
                *v *= 1e-250;
            }
        }
    }
    sum += j;
    for v in &mut out {
        *v /= sum;
    }
    out
}

fn bessel_j_miller(m: u32, x: f64) -> f64 {
    let start = miller_start(m, x);
    let (mut jp1, mut j) = (0.0f64, 1e-30f64);
    let mut sum = 0.0;
    let mut result = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx == m as usize {
            result = j;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            result *= 1e-250;
        }
    }
    sum += j;
    result / sum
}

/// Hankel asymptotic series `(P, Q)` for order `nu`.
fn hankel_pq(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > prev || mag < 1e-18 {
            break;
        }
        prev = mag;
        // terms alternate in pairs: +t0, +t1, -t2, -t3, +t4, ...
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    (p, q)
}

/// `H_nu^(1)(x)` for `nu in {0, 1}` from the asymptotic expansion.
fn hankel_asymptotic(nu: u32, x: f64) -> C64 {
    let (p, q) = hankel_pq(nu, x);
    // chi = x - (2 nu + 1) pi / 4, evaluated without forming chi
    let (cphi, sphi) = if nu == 0 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else {
        (-FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    };
    let (sx, cx) = x.sin_cos();
    let cchi = cx * cphi + sx * sphi;
    let schi = sx * cphi - cx * sphi;
    let amp = (2.0 / (PI * x)).sqrt();
    C64::new(p, q) * C64::new(cchi, schi) * amp
}

/// Bessel function of the first kind `J_m(x)`; negative `x` uses
/// `J_m(-x) = (-1)^m J_m(x)`.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(m, -x);
        return if m.is_multiple_of(2) { v } else { -v };
    }
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if m <= 1 && x >= ASYMPTOTIC_CROSSOVER {
        return hankel_asymptotic(m, x).re;
    }
    if x * x <= 4.0 * (m as f64 + 1.0) {
        bessel_j_series(m, x)
    } else {
        bessel_j_miller(m, x)
    }
}

fn y01_neumann(x: f64) -> (f64, f64) {
    let j = bessel_j_sequence(miller_start(0, x), x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = (2.0 / PI) * (lg * j[0] - 2.0 * s0);
    let y1 = (2.0 / PI) * (-j[0] / x + lg * j[1] + s1);
    (y0, y1)
}

/// Bessel function of the second kind `Y_m(x)`, `m in {0, 1}`, `x > 0`.
pub fn bessel_y(m: u32, x: f64) -> Result<f64, SpecialFnError> {
    if m > 1 {
        return Err(SpecialFnError::Order(m));
    }
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFnError::Domain(x));
    }
    if x >= ASYMPTOTIC_CROSSOVER {
        return Ok(hankel_asymptotic(m, x).im);
    }
    let (y0, y1) = y01_neumann(x);
    Ok(if m == 0 { y0 } else { y1 })
}

/// Hankel function of the first kind `H_m^(1)(x) = J_m(x) + i Y_m(x)`.
pub fn hankel1(m: u32, x: f64) -> Result<C64, SpecialFnError> {
    if m > 1 {
        return Err(SpecialFnError::Order(m));
    }
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFnError::Domain(x));
    }
    if x >= ASYMPTOTIC_CROSSOVER {
        return Ok(hankel_asymptotic(m, x));
    }
    let (y0, y1) = y01_neumann(x);
    let y = if m == 0 { y0 } else { y1 };
    Ok(C64::new(bessel_j(m, x), y))
}

/// `(H_0^(1)(x), H_1^(1)(x))` sharing one Miller sweep.
pub fn hankel01(x: f64) -> Result<(C64, C64), SpecialFnError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFnError::Domain(x));
    }
    if x >= ASYMPTOTIC_CROSSOVER {
        return Ok((hankel_asymptotic(0, x), hankel_asymptotic(1, x)));
    }
    let (y0, y1) = y01_neumann(x);
    Ok((
        C64::new(bessel_j(0, x), y0),
        C64::new(bessel_j(1, x), y1),
    ))
}

/// Outgoing 2D point source `(i/4) H_0^(1)(kappa |x - s|)` and its gradient.
pub fn fundamental_solution(
    x: [f64; 2],
    s: [f64; 2],
    kappa: f64,
) -> Result<(C64, [C64; 2]), SpecialFnError> {
    let dx = [x[0] - s[0], x[1] - s[1]];
    let r = dx[0].hypot(dx[1]);
    if r == 0.0 {
        return Err(SpecialFnError::Singularity);
    }
    let (h0, h1) = hankel01(kappa * r)?;
    let i4 = C64::new(0.0, 0.25);
    let value = i4 * h0;
    let radial = -i4 * kappa * h1 / r;
    Ok((value, [radial * dx[0], radial * dx[1]]))
}
