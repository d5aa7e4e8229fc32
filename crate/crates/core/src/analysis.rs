//! Evaluation of discrete solutions, the kappa-weighted `H^1` error and the
//! coefficient-size probe for plane-wave approximation on the unit disc.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::assembly::{offsets, ReferenceField};
use crate::error::{Error, Result};
use crate::linalg::{norm2, CMatrix};
use crate::mesh::{Mesh, Point};
use crate::quadrature::TriangleRule;
use crate::regsolve::{complex_svd, truncated_pinv};
use crate::specialfn::bessel_j;
use crate::waves::{sample_waves, BasisMode, ElementBasis, SamplePoint};

/// A discrete solution: per-element trial bases and their coefficients.
#[derive(Clone, Copy, Debug)]
pub struct DiscreteField<'a> {
    mesh: &'a Mesh,
    bases: &'a [ElementBasis],
    coefficients: &'a [C64],
}

impl<'a> DiscreteField<'a> {
    pub fn new(mesh: &'a Mesh, bases: &'a [ElementBasis], coefficients: &'a [C64]) -> Result<Self> {
        if bases.len() != mesh.num_elements() {
            return Err(Error::Dimension(format!(
                "{} bases for {} elements",
                bases.len(),
                mesh.num_elements()
            )));
        }
        let n: usize = bases.iter().map(|b| b.trial.len()).sum();
        if coefficients.len() != n {
            return Err(Error::Dimension(format!(
                "{} coefficients for {n} trial functions",
                coefficients.len()
            )));
        }
        Ok(DiscreteField {
            mesh,
            bases,
            coefficients,
        })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    fn element_coefficients(&self, elem: usize) -> &'a [C64] {
        let start: usize = self.bases[..elem].iter().map(|b| b.trial.len()).sum();
        &self.coefficients[start..start + self.bases[elem].trial.len()]
    }

    /// Value and gradient using the basis of a given element.
    pub fn eval_in(&self, elem: usize, x: Point) -> (C64, [C64; 2]) {
        eval_waves(&self.bases[elem], self.element_coefficients(elem), x)
    }

    /// Value and gradient at a point of the mesh.
    pub fn eval(&self, x: Point) -> Result<(C64, [C64; 2])> {
        let elem = self
            .mesh
            .locate(x)
            .ok_or(Error::OutsideDomain(x[0], x[1]))?;
        Ok(self.eval_in(elem, x))
    }
}

fn eval_waves(basis: &ElementBasis, coeffs: &[C64], x: Point) -> (C64, [C64; 2]) {
    let zero = C64::new(0.0, 0.0);
    let mut v = zero;
    let mut g = [zero, zero];
    for (w, &c) in basis.trial.iter().zip(coeffs) {
        let e = c * w.eval(x);
        let k = w.params.wave_vector();
        v += e;
        g[0] += k[0] * e;
        g[1] += k[1] * e;
    }
    (v, g)
}

/// `J_m(kappa r) e^{i m (theta - rotation)}` in polar coordinates about the
/// origin.
#[derive(Clone, Copy, Debug)]
pub struct CircularWave {
    pub m: u32,
    pub kappa: f64,
    pub rotation: f64,
}

impl CircularWave {
    fn bessel(&self, order: i64, kr: f64) -> f64 {
        let v = bessel_j(order.unsigned_abs() as u32, kr);
        if order < 0 && order % 2 != 0 {
            -v
        } else {
            v
        }
    }
}

impl ReferenceField for CircularWave {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        let r = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let kr = self.kappa * r;
        let m = self.m as i64;
        let phase = C64::from_polar(1.0, -(m as f64) * self.rotation);
        let value = phase * C64::from_polar(self.bessel(m, kr), m as f64 * theta);
        // (dx + i dy) J_m e^{im t} = -kappa J_{m+1} e^{i(m+1)t}
        // (dx - i dy) J_m e^{im t} =  kappa J_{m-1} e^{i(m-1)t}
        let a = C64::from_polar(-self.kappa * self.bessel(m + 1, kr), (m + 1) as f64 * theta);
        let b = C64::from_polar(self.kappa * self.bessel(m - 1, kr), (m - 1) as f64 * theta);
        let gx = phase * 0.5 * (a + b);
        let gy = phase * (a - b) / C64::new(0.0, 2.0);
        (value, [gx, gy])
    }
}

/// Kappa-weighted `H^1` error of a discrete field.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub kappa: f64,
    /// `(int |grad e|^2 + kappa^2 |e|^2)^{1/2}`.
    pub abs_error: f64,
    /// The same norm of the reference field.
    pub ref_norm: f64,
    pub rel_error: f64,
    /// Squared error per element.
    pub contributions: Vec<f64>,
    /// Subdivisions per element edge at which the contributions were taken.
    pub subdivisions: Vec<usize>,
    /// Relative change of the error under one further refinement.
    pub delta: f64,
    /// Set when `delta` exceeds 10%.
    pub flagged: bool,
}

/// Integrand `|grad e|^2 + kappa^2 |e|^2` and reference norm density.
/// Quadrature order with coarse and fine `(error, reference)` energies.
type ElementEnergy = (usize, (f64, f64), (f64, f64));

fn local_energy(
    field: &DiscreteField<'_>,
    reference: &dyn ReferenceField,
    kappa: f64,
    elem: usize,
    n: usize,
    rule: &TriangleRule,
) -> (f64, f64) {
    let [v0, v1, v2] = field.mesh.element_vertices(elem);
    let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
    let e2 = [v2[0] - v0[0], v2[1] - v0[1]];
    let area = field.mesh.triangles()[elem].area;
    let nf = n as f64;
    let wscale = 2.0 * area / (nf * nf);
    let k2 = kappa * kappa;
    let basis = &field.bases[elem];
    let coeffs = field.element_coefficients(elem);
    let mut err = 0.0;
    let mut refn = 0.0;
    let mut visit = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            let s = a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]);
            let t = a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]);
            let x = [v0[0] + s * e1[0] + t * e2[0], v0[1] + s * e1[1] + t * e2[1]];
            let (uh, gh) = eval_waves(basis, coeffs, x);
            let (u, g) = reference.value_grad(x);
            let ww = w * wscale;
            err += ww
                * ((g[0] - gh[0]).norm_sqr() + (g[1] - gh[1]).norm_sqr() + k2 * (u - uh).norm_sqr());
            refn += ww * (g[0].norm_sqr() + g[1].norm_sqr() + k2 * u.norm_sqr());
        }
    };
    for i in 0..n {
        for j in 0..n - i {
            let (fi, fj) = (i as f64 / nf, j as f64 / nf);
            let h = 1.0 / nf;
            visit([fi, fj], [fi + h, fj], [fi, fj + h]);
            if i + j + 1 < n {
                visit([fi + h, fj + h], [fi, fj + h], [fi + h, fj]);
            }
        }
    }
    (err, refn)
}

const REFINE_TOL: f64 = 1e-3;
const MAX_EXTRA_LEVELS: usize = 4;

/// Kappa-weighted `H^1` error against a reference field.
///
/// Each triangle is split uniformly into `n^2` copies with
/// `kappa zeta_max h / n <= 4` and integrated with the degree-10 rule. The
/// elements whose contributions still move under doubling `n` are refined
/// (at most four extra levels) until the error and the reference norm change
/// by less than `1e-3` relative; the last observed change is reported.
pub fn h1_error(field: &DiscreteField<'_>, reference: &dyn ReferenceField, kappa: f64) -> ErrorReport {
    let mesh = field.mesh;
    let rule = TriangleRule::degree10();
    let nelem = mesh.num_elements();
    let start: Vec<usize> = (0..nelem)
        .map(|k| {
            let zmax = field.bases[k]
                .trial
                .iter()
                .fold(1.0f64, |z, w| z.max(w.params.zeta));
            let h = mesh.element_diameter(k);
            ((kappa * zmax * h / 4.0).ceil() as usize).max(1)
        })
        .collect();
    let eval = |k: usize, n: usize| local_energy(field, reference, kappa, k, n, &rule);
    // (n, coarse, fine) per element; fine is taken at 2n
    let mut state: Vec<ElementEnergy> = (0..nelem)
        .into_par_iter()
        .map(|k| (start[k], eval(k, start[k]), eval(k, 2 * start[k])))
        .collect();
    let totals = |state: &[ElementEnergy]| {
        let fe: f64 = state.iter().map(|s| s.2 .0).sum();
        let fr: f64 = state.iter().map(|s| s.2 .1).sum();
        let de: f64 = state.iter().map(|s| (s.2 .0 - s.1 .0).abs()).sum();
        let dr: f64 = state.iter().map(|s| (s.2 .1 - s.1 .1).abs()).sum();
        (fe, fr, de, dr)
    };
    for _ in 0..MAX_EXTRA_LEVELS {
        let (fe, fr, de, dr) = totals(&state);
        let rel = |d: f64, f: f64| if f > 0.0 { d / f } else { 0.0 };
        // squared quantities: a relative change 2 tol in the square is tol in the norm
        if rel(de, fe) <= 2.0 * REFINE_TOL && rel(dr, fr) <= 2.0 * REFINE_TOL {
            break;
        }
        let refine: Vec<usize> = (0..nelem)
            .filter(|&k| {
                let s = &state[k];
                rel((s.2 .0 - s.1 .0).abs(), fe) > REFINE_TOL / nelem as f64
                    || rel((s.2 .1 - s.1 .1).abs(), fr) > REFINE_TOL / nelem as f64
            })
            .collect();
        let updated: Vec<(usize, (f64, f64))> = refine
            .par_iter()
            .map(|&k| (k, eval(k, 4 * state[k].0)))
            .collect();
        for (k, fine) in updated {
            let s = &mut state[k];
            *s = (2 * s.0, s.2, fine);
        }
    }
    let (fe, fr, _, _) = totals(&state);
    let ce: f64 = state.iter().map(|s| s.1 .0).sum();
    let abs_error = fe.sqrt();
    let ref_norm = fr.sqrt();
    let delta = if abs_error > 0.0 {
        (abs_error - ce.sqrt()).abs() / abs_error
    } else {
        0.0
    };
    if delta > 0.01 {
        log::warn!("H1 error quadrature changed by {:.2}% under refinement", 100.0 * delta);
    }
    ErrorReport {
        kappa,
        abs_error,
        ref_norm,
        rel_error: if ref_norm > 0.0 { abs_error / ref_norm } else { f64::NAN },
        contributions: state.iter().map(|s| s.2 .0).collect(),
        subdivisions: state.iter().map(|s| 2 * s.0).collect(),
        delta,
        flagged: delta > 0.1,
    }
}

/// Number of anchor points on the unit circle used to normalize the waves.
pub const PROBE_ANCHORS: usize = 64;
/// Low-discrepancy interior sample points of the probe.
pub const PROBE_INTERIOR: usize = 1024;

const PROBE_REFINEMENT_STEPS: usize = 4;

/// Least-squares approximation of a circular wave on the unit disc.
#[derive(Clone, Copy, Debug)]
pub struct StabilityProbe {
    pub m: u32,
    pub kappa: f64,
    pub p: usize,
    pub mode: BasisMode,
    pub epsilon: f64,
    /// Rotation of the target, `e^{im(theta - rotation)}`.
    pub rotation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityProbeReport {
    pub mode: BasisMode,
    pub m: u32,
    pub p: usize,
    /// Relative discrete `l^2` fit error.
    pub delta: f64,
    /// Euclidean norm of the coefficients for a target of unit RMS.
    pub mu_norm: f64,
    pub rank: usize,
    pub samples: usize,
}

fn circle_points(n: usize) -> Vec<Point> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Sample points: `max(8P, 2048)` equispaced on the circle, then
/// `PROBE_INTERIOR` Sobol points mapped area-uniformly into the disc.
pub fn probe_points(p: usize) -> Vec<Point> {
    let mut pts = circle_points((8 * p).max(2048));
    pts.extend((0..PROBE_INTERIOR as u32).map(|i| {
        let y = SamplePoint::from_sobol(i);
        // theta = 2 pi u1, r = sqrt(xi)
        let r = y.xi.sqrt();
        [r * y.theta.cos(), r * y.theta.sin()]
    }));
    pts
}

impl StabilityProbe {
    pub fn new(m: u32, kappa: f64, p: usize, mode: BasisMode, epsilon: f64) -> Self {
        StabilityProbe {
            m,
            kappa,
            p,
            mode,
            epsilon,
            rotation: 0.0,
        }
    }

    pub fn run(&self) -> Result<StabilityProbeReport> {
        let anchor = circle_points(PROBE_ANCHORS);
        let waves = sample_waves(&anchor, 2.0, self.p, self.kappa, self.mode, 0)?;
        let pts = probe_points(self.p);
        let target = CircularWave {
            m: self.m,
            kappa: self.kappa,
            rotation: self.rotation,
        };
        let mut t: Vec<C64> = pts.iter().map(|&x| target.value(x)).collect();
        let rms = norm2(&t) / (t.len() as f64).sqrt();
        for z in &mut t {
            *z /= rms;
        }
        let a = CMatrix::from_fn(pts.len(), waves.len(), |i, j| waves[j].eval(pts[i]));
        let f = complex_svd(&a, self.epsilon)?;
        let pinv = truncated_pinv(&f, self.epsilon)?;
        // iterative refinement against rounding in the weakest retained
        // singular triplets
        let mut mu = pinv.data.matvec(&t);
        let mut res: Vec<C64> = a.matvec(&mu).iter().zip(&t).map(|(p, q)| p - q).collect();
        for _ in 0..PROBE_REFINEMENT_STEPS {
            let step = pinv.data.matvec(&res);
            let trial: Vec<C64> = mu.iter().zip(&step).map(|(m, d)| m - d).collect();
            let trial_res: Vec<C64> =
                a.matvec(&trial).iter().zip(&t).map(|(p, q)| p - q).collect();
            if norm2(&trial_res) >= norm2(&res) {
                break;
            }
            mu = trial;
            res = trial_res;
        }
        Ok(StabilityProbeReport {
            mode: self.mode,
            m: self.m,
            p: self.p,
            delta: norm2(&res) / norm2(&t),
            mu_norm: norm2(&mu),
            rank: pinv.rank,
            samples: pts.len(),
        })
    }
}

pub fn stability_probe(
    m: u32,
    kappa: f64,
    p: usize,
    mode: BasisMode,
    epsilon: f64,
) -> Result<StabilityProbeReport> {
    StabilityProbe::new(m, kappa, p, mode, epsilon).run()
}

/// Total trial dimension of a set of bases.
pub fn ndof(bases: &[ElementBasis]) -> usize {
    *offsets(bases.iter().map(|b| b.trial.len())).last().unwrap()
}
