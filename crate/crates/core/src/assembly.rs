//! Ultraweak variational formulation of the impedance problem
//!
//! ```text
//! Delta u + kappa^2 u = 0 in Omega,   d_n u - i kappa sigma u = g on dOmega
//! ```
//!
//! With Robin traces `gamma_+-^K v = +-d_{n_K} v - i kappa sigma v` the
//! discrete problem is `(D - C) u = b`:
//!
//! * `D[r,q] = sum_K int_{dK} sigma^-1 gamma_-^K psi_q conj(gamma_-^K phi_r)`
//!   (block diagonal, one tall `N_test x N_trial` block per element),
//! * `C[r,q] = int_{dK1 cap dK2} sigma^-1 gamma_-^{K1} psi_q conj(gamma_+^{K2} phi_r)`
//!   over ordered pairs of distinct neighbours (trial on `K1`, test on `K2`),
//! * `b[r] = int_{dK cap dOmega} sigma^-1 g conj(gamma_+^K phi_r)`.
//!
//! On a flat edge a plane wave's Robin trace is a constant multiple of the
//! wave, so every `D` and `C` entry reduces to a closed-form integral of an
//! exponential along a segment.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg::{axpy, CMatrix};
use crate::mesh::{Mesh, Point};
use crate::quadrature::GaussLegendre;
use crate::specialfn::{fundamental_solution, phi0};
use crate::waves::{ElementBasis, EpwParams, NormalizedWave};

/// A field with gradient, used as exact solution or boundary-data source.
pub trait ReferenceField: Sync {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]);

    fn value(&self, x: Point) -> C64 {
        self.value_grad(x).0
    }
}

impl ReferenceField for EpwParams {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        (self.eval(x), self.grad(x))
    }
}

impl<F: ReferenceField + ?Sized> ReferenceField for &F {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        (**self).value_grad(x)
    }
}

/// Outgoing point source `(i/4) H_0^(1)(kappa |x - s|)`.
#[derive(Clone, Copy, Debug)]
pub struct PointSource {
    pub source: Point,
    pub kappa: f64,
}

impl ReferenceField for PointSource {
    fn value_grad(&self, x: Point) -> (C64, [C64; 2]) {
        fundamental_solution(x, self.source, self.kappa).unwrap_or_else(|_| {
            let nan = C64::new(f64::NAN, f64::NAN);
            (nan, [nan, nan])
        })
    }
}

/// Impedance datum `g(x, n)` on the boundary.
pub trait BoundaryDatum: Sync {
    fn eval(&self, x: Point, normal: Point) -> C64;
}

pub struct ZeroDatum;

impl BoundaryDatum for ZeroDatum {
    fn eval(&self, _: Point, _: Point) -> C64 {
        C64::new(0.0, 0.0)
    }
}

/// `g = grad u . n - i kappa sigma u` for a known solution `u`.
pub struct ManufacturedDatum<F> {
    pub reference: F,
    pub sigma: f64,
    pub kappa: f64,
}

impl<F: ReferenceField> BoundaryDatum for ManufacturedDatum<F> {
    fn eval(&self, x: Point, n: Point) -> C64 {
        let (u, g) = self.reference.value_grad(x);
        g[0] * n[0] + g[1] * n[1] - C64::new(0.0, self.kappa * self.sigma) * u
    }
}

pub fn manufacture_g<F: ReferenceField>(reference: F, sigma: f64, kappa: f64) -> ManufacturedDatum<F> {
    ManufacturedDatum {
        reference,
        sigma,
        kappa,
    }
}

/// Impedance parameter on the domain boundary and on the interior skeleton.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Impedance {
    pub boundary: f64,
    pub interior: f64,
}

impl Default for Impedance {
    fn default() -> Self {
        Impedance {
            boundary: 1.0,
            interior: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceSign {
    Plus,
    Minus,
}

/// The constant `c` with `gamma_+- EW = c EW` on a flat edge with this normal:
/// `c = +-i kappa (d.n) - i kappa sigma`.
pub fn robin_trace_factor(w: &EpwParams, normal: Point, sigma: f64, sign: TraceSign) -> C64 {
    let dn = w.d[0] * normal[0] + w.d[1] * normal[1];
    let ik = C64::new(0.0, w.kappa);
    let s = match sign {
        TraceSign::Plus => 1.0,
        TraceSign::Minus => -1.0,
    };
    ik * dn * s - ik * sigma
}

/// Exponent of a normalized wave restricted to a segment `a + t (b - a)`:
/// `alpha + beta t`.
#[derive(Clone, Copy, Debug)]
struct SegmentExp {
    alpha: C64,
    beta: C64,
}

impl SegmentExp {
    fn new(w: &NormalizedWave, a: Point, b: Point) -> Self {
        SegmentExp {
            alpha: w.exponent(a),
            beta: w.params.exponent([b[0] - a[0], b[1] - a[1]]),
        }
    }
}

/// `len * int_0^1 exp(q(t) + conj(r(t))) dt`, evaluated from the endpoint
/// with the larger modulus so that `phi0` never sees a growing exponential.
#[inline]
fn segment_pair(len: f64, q: SegmentExp, r: SegmentExp) -> C64 {
    let a0 = q.alpha + r.alpha.conj();
    let a = q.beta + r.beta.conj();
    if a.re > 0.0 {
        (a0 + a).exp() * phi0(-a) * len
    } else {
        a0.exp() * phi0(a) * len
    }
}

/// `int_{[a,b]} wq conj(wr) ds` for normalized waves, in closed form.
pub fn edge_integral(a: Point, b: Point, wq: &NormalizedWave, wr: &NormalizedWave) -> C64 {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    segment_pair(len, SegmentExp::new(wq, a, b), SegmentExp::new(wr, a, b))
}

#[derive(Clone, Debug)]
pub struct Block {
    pub row_elem: usize,
    pub col_elem: usize,
    pub data: CMatrix,
}

/// Sparse matrix of dense element blocks. Rows are indexed by test waves and
/// columns by trial waves.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    pub row_offsets: Vec<usize>,
    pub col_offsets: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl BlockMatrix {
    pub fn nrows(&self) -> usize {
        *self.row_offsets.last().unwrap_or(&0)
    }

    pub fn ncols(&self) -> usize {
        *self.col_offsets.last().unwrap_or(&0)
    }

    pub fn block(&self, row_elem: usize, col_elem: usize) -> Option<&Block> {
        self.blocks
            .iter()
            .find(|b| b.row_elem == row_elem && b.col_elem == col_elem)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols());
        let mut y = vec![C64::new(0.0, 0.0); self.nrows()];
        for b in &self.blocks {
            let r0 = self.row_offsets[b.row_elem];
            let c0 = self.col_offsets[b.col_elem];
            let xs = &x[c0..c0 + b.data.cols()];
            let yb = &mut y[r0..r0 + b.data.rows()];
            for (j, &xj) in xs.iter().enumerate() {
                axpy(yb, xj, b.data.col(j));
            }
        }
        y
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows(), self.ncols());
        for b in &self.blocks {
            let r0 = self.row_offsets[b.row_elem];
            let c0 = self.col_offsets[b.col_elem];
            for j in 0..b.data.cols() {
                for i in 0..b.data.rows() {
                    m[(r0 + i, c0 + j)] += b.data[(i, j)];
                }
            }
        }
        m
    }

    pub fn norm_fro(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.data.norm_fro().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Prefix sums of per-element wave counts.
pub fn offsets(counts: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = vec![0];
    for c in counts {
        out.push(out.last().unwrap() + c);
    }
    out
}

fn trial_offsets(bases: &[ElementBasis]) -> Vec<usize> {
    offsets(bases.iter().map(|b| b.trial.len()))
}

fn test_offsets(bases: &[ElementBasis]) -> Vec<usize> {
    offsets(bases.iter().map(|b| b.test.len()))
}

/// Accumulates `sigma^-1 ctr_q conj(cte_r) int psi_q conj(phi_r)` over one edge.
#[allow(clippy::too_many_arguments)]
fn accumulate_edge(
    block: &mut CMatrix,
    a: Point,
    b: Point,
    trial: &[NormalizedWave],
    trial_factor: &[C64],
    test: &[NormalizedWave],
    test_factor: &[C64],
    sigma: f64,
) {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let q_exp: Vec<SegmentExp> = trial.iter().map(|w| SegmentExp::new(w, a, b)).collect();
    let r_exp: Vec<SegmentExp> = test.iter().map(|w| SegmentExp::new(w, a, b)).collect();
    let inv_sigma = 1.0 / sigma;
    for (q, (&qe, &cq)) in q_exp.iter().zip(trial_factor).enumerate() {
        let col = block.col_mut(q);
        let cq = cq * inv_sigma;
        for (r, (&re, &cr)) in r_exp.iter().zip(test_factor).enumerate() {
            col[r] += cq * cr.conj() * segment_pair(len, qe, re);
        }
    }
}

fn trace_factors(waves: &[NormalizedWave], normal: Point, sigma: f64, sign: TraceSign) -> Vec<C64> {
    waves
        .iter()
        .map(|w| robin_trace_factor(&w.params, normal, sigma, sign))
        .collect()
}

fn edge_sigma(mesh: &Mesh, e: usize, imp: Impedance) -> f64 {
    if mesh.edges()[e].is_boundary() {
        imp.boundary
    } else {
        imp.interior
    }
}

/// Block-diagonal `D`: one `N_test x N_trial` block per element.
pub fn assemble_d(mesh: &Mesh, bases: &[ElementBasis], imp: Impedance) -> BlockMatrix {
    assert_eq!(bases.len(), mesh.num_elements());
    let blocks = bases
        .par_iter()
        .map(|basis| {
            let k = basis.elem;
            let mut block = CMatrix::zeros(basis.test.len(), basis.trial.len());
            for e in mesh.element_edges(k) {
                let [a, b] = mesh.edge_points(e);
                let normal = mesh.edges()[e].normal_from(k);
                let sigma = edge_sigma(mesh, e, imp);
                let cq = trace_factors(&basis.trial, normal, sigma, TraceSign::Minus);
                let cr = trace_factors(&basis.test, normal, sigma, TraceSign::Minus);
                accumulate_edge(&mut block, a, b, &basis.trial, &cq, &basis.test, &cr, sigma);
            }
            Block {
                row_elem: k,
                col_elem: k,
                data: block,
            }
        })
        .collect();
    BlockMatrix {
        row_offsets: test_offsets(bases),
        col_offsets: trial_offsets(bases),
        blocks,
    }
}

/// Neighbour coupling `C`: for every interior edge shared by `K1`, `K2` one
/// block (test `K2`, trial `K1`) and one with the roles swapped. No
/// self-blocks and no boundary contributions.
pub fn assemble_c(mesh: &Mesh, bases: &[ElementBasis], imp: Impedance) -> BlockMatrix {
    assert_eq!(bases.len(), mesh.num_elements());
    let interior: Vec<usize> = (0..mesh.edges().len())
        .filter(|&e| !mesh.edges()[e].is_boundary())
        .collect();
    let blocks = interior
        .par_iter()
        .flat_map_iter(|&e| {
            let edge = &mesh.edges()[e];
            let [a, b] = mesh.edge_points(e);
            let sigma = imp.interior;
            let l = edge.left;
            let r = edge.right.expect("interior edge");
            [(l, r), (r, l)].into_iter().map(move |(k1, k2)| {
                let (b1, b2) = (&bases[k1], &bases[k2]);
                let cq = trace_factors(&b1.trial, edge.normal_from(k1), sigma, TraceSign::Minus);
                let cr = trace_factors(&b2.test, edge.normal_from(k2), sigma, TraceSign::Plus);
                let mut block = CMatrix::zeros(b2.test.len(), b1.trial.len());
                accumulate_edge(&mut block, a, b, &b1.trial, &cq, &b2.test, &cr, sigma);
                Block {
                    row_elem: k2,
                    col_elem: k1,
                    data: block,
                }
            })
        })
        .collect();
    BlockMatrix {
        row_offsets: test_offsets(bases),
        col_offsets: trial_offsets(bases),
        blocks,
    }
}

/// Starting Gauss-Legendre order for a boundary edge:
/// `max(12, ceil(1.5 (kappa zeta_max + kappa eta_max) |e|))`.
pub fn rhs_base_order(waves: &[NormalizedWave], length: f64) -> usize {
    let (zmax, emax) = waves.iter().fold((1.0f64, 0.0f64), |(z, e), w| {
        (z.max(w.params.zeta), e.max(w.params.eta))
    });
    let kappa = waves.first().map_or(0.0, |w| w.params.kappa);
    let n = (1.5 * (kappa * zmax * length + kappa * emax * length)).ceil() as usize;
    n.max(12)
}

const RHS_REL_TOL: f64 = 1e-12;
const RHS_MAX_ORDER: usize = 8192;

#[allow(clippy::too_many_arguments)]
fn rhs_edge_entries(
    a: Point,
    b: Point,
    normal: Point,
    waves: &[NormalizedWave],
    factors: &[C64],
    sigma: f64,
    g: &dyn BoundaryDatum,
    order: usize,
) -> Vec<C64> {
    let gl = GaussLegendre::new(order);
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let mut out = vec![C64::new(0.0, 0.0); waves.len()];
    for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        let gx = g.eval(x, normal) * (wt * len / sigma);
        if gx == C64::new(0.0, 0.0) {
            continue;
        }
        for ((o, w), c) in out.iter_mut().zip(waves).zip(factors) {
            *o += gx * (c * w.eval(x)).conj();
        }
    }
    out
}

/// Result of the boundary quadrature on one edge.
#[derive(Clone, Debug)]
pub struct RhsEdgeReport {
    pub edge: usize,
    pub order: usize,
    /// Max entry change between the accepted order and half of it,
    /// relative to the largest entry.
    pub rel_change: f64,
}

/// Right-hand side by Gauss-Legendre quadrature on each boundary edge,
/// doubling the order from [`rhs_base_order`] until entries change by at
/// most `1e-12` relative.
pub fn assemble_rhs(
    mesh: &Mesh,
    bases: &[ElementBasis],
    imp: Impedance,
    g: &dyn BoundaryDatum,
) -> (Vec<C64>, Vec<RhsEdgeReport>) {
    let offs = test_offsets(bases);
    let sigma = imp.boundary;
    let pieces: Vec<(usize, Vec<C64>, RhsEdgeReport)> = mesh
        .boundary_edges()
        .par_iter()
        .map(|&e| {
            let edge = &mesh.edges()[e];
            let k = edge.left;
            let [a, b] = mesh.edge_points(e);
            let waves = &bases[k].test;
            let factors = trace_factors(waves, edge.normal, sigma, TraceSign::Plus);
            let mut order = rhs_base_order(waves, edge.length);
            let mut coarse = rhs_edge_entries(a, b, edge.normal, waves, &factors, sigma, g, order);
            loop {
                let fine =
                    rhs_edge_entries(a, b, edge.normal, waves, &factors, sigma, g, 2 * order);
                let scale = fine.iter().fold(0.0f64, |m, z| m.max(z.norm()));
                let change = coarse
                    .iter()
                    .zip(&fine)
                    .fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
                let rel = if scale > 0.0 { change / scale } else { 0.0 };
                order *= 2;
                if rel <= RHS_REL_TOL || 2 * order > RHS_MAX_ORDER {
                    if rel > RHS_REL_TOL {
                        log::warn!("boundary quadrature on edge {e} stopped at order {order}, change {rel:.2e}");
                    }
                    return (
                        k,
                        fine,
                        RhsEdgeReport {
                            edge: e,
                            order,
                            rel_change: rel,
                        },
                    );
                }
                coarse = fine;
            }
        })
        .collect();
    let mut rhs = vec![C64::new(0.0, 0.0); *offs.last().unwrap()];
    let mut reports = Vec::with_capacity(pieces.len());
    for (k, entries, rep) in pieces {
        for (o, v) in rhs[offs[k]..offs[k + 1]].iter_mut().zip(entries) {
            *o += v;
        }
        reports.push(rep);
    }
    (rhs, reports)
}

/// The assembled discrete problem `(D - C) u = b`.
#[derive(Clone, Debug)]
pub struct UwvfSystem {
    pub d: BlockMatrix,
    pub c: BlockMatrix,
    pub b: Vec<C64>,
    pub rhs_quadrature: Vec<RhsEdgeReport>,
}

pub fn assemble_system(
    mesh: &Mesh,
    bases: &[ElementBasis],
    imp: Impedance,
    g: &dyn BoundaryDatum,
) -> UwvfSystem {
    let d = assemble_d(mesh, bases, imp);
    let c = assemble_c(mesh, bases, imp);
    let (b, rhs_quadrature) = assemble_rhs(mesh, bases, imp, g);
    UwvfSystem {
        d,
        c,
        b,
        rhs_quadrature,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{build_bases, BasisMode};

    fn ppw(theta: f64, kappa: f64) -> EpwParams {
        EpwParams::propagative(theta, kappa).unwrap()
    }

    #[test]
    fn trace_factor_cases() {
        let kappa = 3.0;
        let w = ppw(0.0, kappa);
        let n = [1.0, 0.0];
        let minus = robin_trace_factor(&w, n, 1.0, TraceSign::Minus);
        let plus = robin_trace_factor(&w, n, 1.0, TraceSign::Plus);
        assert!((minus - C64::new(0.0, -2.0 * kappa)).norm() < 1e-15);
        assert!(plus.norm() < 1e-15);
        let e = EpwParams::new(1.1, -1, 2.5, kappa).unwrap();
        let n = [0.6, 0.8];
        let s = robin_trace_factor(&e, n, 0.7, TraceSign::Plus)
            + robin_trace_factor(&e, n, 0.7, TraceSign::Minus);
        assert!((s - C64::new(0.0, -2.0 * kappa * 0.7)).norm() < 1e-14);
    }

    #[test]
    fn same_ppw_integrates_to_length() {
        let anchor = [[0.0, 0.0]];
        let w = NormalizedWave::new(ppw(0.4, 16.0), &anchor);
        let v = edge_integral([0.1, 0.2], [0.4, 0.6], &w, &w);
        assert!((v - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ppw_pair_on_axis() {
        let kappa = 16.0;
        let anchor = [[0.0, 0.0]];
        let wq = NormalizedWave::new(ppw(0.3, kappa), &anchor);
        let wr = NormalizedWave::new(ppw(2.0, kappa), &anchor);
        let dd = wq.params.d[0].re - wr.params.d[0].re;
        let want = phi0(C64::new(0.0, kappa * dd));
        let got = edge_integral([0.0, 0.0], [1.0, 0.0], &wq, &wr);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn single_element_has_no_coupling() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let bases = build_bases(&mesh, 5, 1.1, 4.0, BasisMode::Epw, 0).unwrap();
        assert!(assemble_c(&mesh, &bases, Impedance::default()).blocks.is_empty());
    }

    #[test]
    fn two_elements_two_blocks() {
        let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1, 0.0, 0).unwrap();
        let bases = build_bases(&mesh, 4, 1.1, 4.0, BasisMode::Epw, 0).unwrap();
        let c = assemble_c(&mesh, &bases, Impedance::default());
        assert_eq!(c.blocks.len(), 2);
        assert!(c.block(0, 1).is_some() && c.block(1, 0).is_some());
        assert!(c.block(0, 0).is_none());
        assert_eq!((c.nrows(), c.ncols()), (10, 8));
    }

    #[test]
    fn single_wave_block_is_positive_real() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let anchor = mesh.element_vertices(0);
        let w = NormalizedWave::new(EpwParams::new(0.5, 1, 1.5, 3.0).unwrap(), &anchor);
        let basis = [ElementBasis {
            elem: 0,
            trial: vec![w],
            test: vec![w],
        }];
        let d = assemble_d(&mesh, &basis, Impedance::default());
        let v = d.blocks[0].data[(0, 0)];
        assert!(v.re > 0.0 && v.im.abs() <= 1e-14 * v.re);
        // sigma^-1 |c_-|^2 int_{dK} |EW|^2, with the boundary integral by quadrature
        let gl = GaussLegendre::new(60);
        let mut want = 0.0;
        for e in mesh.element_edges(0) {
            let [a, b] = mesh.edge_points(e);
            let n = mesh.edges()[e].normal_from(0);
            let c = robin_trace_factor(&w.params, n, 1.0, TraceSign::Minus);
            let len = mesh.edges()[e].length;
            want += c.norm_sqr()
                * len
                * gl.integrate(|t| {
                    w.eval([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
                        .norm_sqr()
                });
        }
        assert!((v.re - want).abs() < 1e-12 * want);
    }

    #[test]
    fn zero_datum_gives_zero_rhs() {
        let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.0, 0).unwrap();
        let bases = build_bases(&mesh, 6, 1.1, 5.0, BasisMode::Epw, 0).unwrap();
        let (b, _) = assemble_rhs(&mesh, &bases, Impedance::default(), &ZeroDatum);
        assert!(b.iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn matched_impedance_datum_vanishes() {
        // sigma = d.n on an edge with normal n: g = (i kappa d.n - i kappa sigma) u = 0
        let kappa = 7.0;
        let w = ppw(0.0, kappa);
        let n = [0.6, 0.8];
        let sigma = 0.6;
        let g = manufacture_g(w, sigma, kappa);
        assert!(g.eval([0.3, 0.9], n).norm() < 1e-14);
    }

    #[test]
    fn ppw_datum_formula() {
        let kappa = 4.0;
        let w = ppw(0.9, kappa);
        let n = [0.0, -1.0];
        let x = [0.25, 0.0];
        let g = manufacture_g(w, 1.0, kappa).eval(x, n);
        let dn = w.d[0] * n[0] + w.d[1] * n[1];
        let want = (C64::new(0.0, kappa) * dn - C64::new(0.0, kappa)) * w.eval(x);
        assert!((g - want).norm() < 1e-14);
        let ps = PointSource {
            source: [-0.1, 0.0],
            kappa,
        };
        assert!(manufacture_g(ps, 1.0, kappa).eval([0.0, 0.2], [-1.0, 0.0]).norm().is_finite());
    }

    #[test]
    fn interior_only_elements_have_zero_rows() {
        let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 3, 3, 0.0, 0).unwrap();
        let kappa = 4.0;
        let bases = build_bases(&mesh, 5, 1.1, kappa, BasisMode::Epw, 0).unwrap();
        let g = manufacture_g(ppw(0.3, kappa), 1.0, kappa);
        let (b, _) = assemble_rhs(&mesh, &bases, Impedance::default(), &g);
        let offs = test_offsets(&bases);
        for k in 0..mesh.num_elements() {
            let touches = mesh
                .element_edges(k)
                .iter()
                .any(|&e| mesh.edges()[e].is_boundary());
            let nz = b[offs[k]..offs[k + 1]].iter().any(|z| z.norm() > 0.0);
            assert_eq!(touches, nz, "element {k}");
        }
    }
}
