mod common;

use proptest::prelude::*;
use std::f64::consts::PI;
use trefftz_epw::assembly::*;
use trefftz_epw::linalg::svd;
use trefftz_epw::mesh::{Mesh, Point};
use trefftz_epw::quadrature::GaussLegendre;
use trefftz_epw::waves::*;
use trefftz_epw::C64;

fn quad_edge(a: Point, b: Point, wq: &NormalizedWave, wr: &NormalizedWave, n: usize) -> C64 {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    GaussLegendre::new(n).integrate(|t| {
        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        wq.eval(x) * wr.eval(x).conj() * len
    })
}

fn wave(theta: f64, phi: i32, eta: f64, kappa: f64, anchor: &[Point]) -> NormalizedWave {
    NormalizedWave::new(EpwParams::new(theta, phi, eta, kappa).unwrap(), anchor)
}

fn square_bases(mesh: &Mesh, p: usize, kappa: f64, mode: BasisMode) -> Vec<ElementBasis> {
    (0..mesh.num_elements())
        .map(|elem| {
            let trial = sample_basis(mesh, elem, p, kappa, mode, 0).unwrap();
            ElementBasis {
                elem,
                test: trial.clone(),
                trial,
            }
        })
        .collect()
}

#[test]
fn trace_factor_examples() {
    let kappa = 5.0;
    let w = EpwParams::propagative(0.0, kappa).unwrap();
    let n = [1.0, 0.0];
    let minus = robin_trace_factor(&w, n, 1.0, TraceSign::Minus);
    let plus = robin_trace_factor(&w, n, 1.0, TraceSign::Plus);
    assert!((minus - C64::new(0.0, -2.0 * kappa)).norm() < 1e-14);
    assert!(plus.norm() < 1e-14);
    let w = EpwParams::new(1.1, -1, 2.5, kappa).unwrap();
    let n = [0.6, 0.8];
    let sum = robin_trace_factor(&w, n, 0.7, TraceSign::Plus) + robin_trace_factor(&w, n, 0.7, TraceSign::Minus);
    assert!((sum - C64::new(0.0, -2.0 * kappa * 0.7)).norm() < 1e-13);
}

#[test]
fn edge_integral_examples() {
    let (a, b) = ([0.0, 0.0], [1.0, 0.0]);
    let anchor = [a, b, [0.0, 1.0]];
    let w = wave(0.4, 1, 0.0, 16.0, &anchor);
    assert!((edge_integral(a, b, &w, &w) - 1.0).norm() < 1e-14);

    let kappa = 16.0;
    let (wq, wr) = (wave(0.3, 1, 0.0, kappa, &anchor), wave(2.0, 1, 0.0, kappa, &anchor));
    let dd = 0.3f64.cos() - 2.0f64.cos();
    let closed = (C64::new(0.0, kappa * dd).exp() - 1.0) / C64::new(0.0, kappa * dd);
    assert!(common::rel_err(edge_integral(a, b, &wq, &wr), closed) < 1e-13);
    assert!(common::rel_err(quad_edge(a, b, &wq, &wr, 64), closed) < 1e-13);

    // decaying along the edge with kappa eta |e| = 20
    let eta = 20.0 / kappa;
    let we = wave(PI / 2.0, 1, eta, kappa, &anchor);
    let got = edge_integral(a, b, &we, &wq);
    assert!(common::rel_err(got, quad_edge(a, b, &we, &wq, 256)) < 1e-13);
}

#[test]
fn d_is_hermitian_positive_on_forty_triangles() {
    let mesh = Mesh::rectangle([0.0, -0.5], [1.0, 0.5], 4, 5, 0.2, 1).unwrap();
    for (mode, p) in [(BasisMode::Ppw, 12), (BasisMode::Epw, 24)] {
        let bases = square_bases(&mesh, p, 16.0, mode);
        let d = assemble_d(&mesh, &bases, Impedance::default());
        assert_eq!(d.blocks.len(), mesh.num_elements());
        for blk in &d.blocks {
            assert_eq!(blk.row_elem, blk.col_elem);
            let diff = blk.data.sub(&blk.data.adjoint()).unwrap().norm_fro();
            assert!(diff <= 1e-12 * blk.data.norm_fro());
            let s = svd(&blk.data).unwrap().s;
            assert!(*s.last().unwrap() > 0.0);
        }
    }
}

#[test]
fn single_wave_d_block() {
    let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.2, 0.7]], vec![[0, 1, 2]]).unwrap();
    let kappa = 3.0;
    let sigma = 0.8;
    let w = wave(0.9, 1, 0.0, kappa, &mesh.element_vertices(0));
    let bases = vec![ElementBasis {
        elem: 0,
        trial: vec![w],
        test: vec![w],
    }];
    let imp = Impedance {
        boundary: sigma,
        interior: 1.0,
    };
    let d = assemble_d(&mesh, &bases, imp);
    let expected: f64 = mesh
        .edges()
        .iter()
        .map(|e| robin_trace_factor(&w.params, e.normal, sigma, TraceSign::Minus).norm_sqr() * e.length / sigma)
        .sum();
    let got = d.blocks[0].data.col(0)[0];
    assert!(got.im.abs() < 1e-13 * expected);
    assert!((got.re / expected - 1.0).abs() < 1e-13);
}

#[test]
fn coupling_structure() {
    let one = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
    let bases = square_bases(&one, 5, 8.0, BasisMode::Epw);
    let c = assemble_c(&one, &bases, Impedance::default());
    assert!(c.blocks.is_empty());
    assert_eq!(c.norm_fro(), 0.0);

    let two = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1, 0.0, 0).unwrap();
    let bases = square_bases(&two, 5, 8.0, BasisMode::Epw);
    let c = assemble_c(&two, &bases, Impedance::default());
    assert_eq!(c.blocks.len(), 2);
    let mut pairs: Vec<_> = c.blocks.iter().map(|b| (b.row_elem, b.col_elem)).collect();
    pairs.sort();
    assert_eq!(pairs, vec![(0, 1), (1, 0)]);
}

#[test]
fn rhs_examples() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 3, 3, 0.1, 2).unwrap();
    let kappa = 10.0;
    let bases = build_bases(&mesh, 16, 1.1, kappa, BasisMode::Epw, 0).unwrap();
    let (b, _) = assemble_rhs(&mesh, &bases, Impedance::default(), &ZeroDatum);
    assert!(b.iter().all(|z| z.norm() == 0.0));

    let u = EpwParams::propagative(0.7, kappa).unwrap();
    let g = manufacture_g(u, 1.0, kappa);
    let (b, reports) = assemble_rhs(&mesh, &bases, Impedance::default(), &g);
    assert!(reports.iter().all(|r| r.rel_change <= 1e-10));
    let offs = offsets(bases.iter().map(|x| x.test.len()));
    for k in 0..mesh.num_elements() {
        let on_boundary = mesh.element_edges(k).iter().any(|&e| mesh.edges()[e].is_boundary());
        let rows = &b[offs[k]..offs[k + 1]];
        if on_boundary {
            assert!(rows.iter().any(|z| z.norm() > 0.0));
        } else {
            assert!(rows.iter().all(|z| z.norm() == 0.0), "element {k}");
        }
    }
}

#[test]
fn manufactured_datum_examples() {
    let kappa = 7.0;
    let u = EpwParams::propagative(0.5, kappa).unwrap();
    let x = [0.3, -0.1];
    let n = [0.0, 1.0];
    let g = manufacture_g(u, 1.3, kappa).eval(x, n);
    let dn = 0.5f64.sin();
    let expected = C64::new(0.0, kappa * dn - kappa * 1.3) * u.eval(x);
    assert!((g - expected).norm() < 1e-13);
    // impedance-matched: sigma = d.n
    let d = u.propagation_direction();
    assert!(manufacture_g(u, 1.0, kappa).eval(x, d).norm() < 1e-13);

    let ps = PointSource {
        source: [-0.1, 0.0],
        kappa,
    };
    let g = manufacture_g(ps, 1.0, kappa);
    for t in 0..20 {
        assert!(g.eval([0.0, -0.5 + t as f64 / 19.0], [-1.0, 0.0]).is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn edge_integral_matches_quadrature(
        seed in 0u64..1_000_000,
        kappa in prop::sample::select(vec![1.0, 16.0, 64.0]),
        eta_q in prop::sample::select(vec![0.0, 1.0, 8.0]),
        eta_r in prop::sample::select(vec![0.0, 1.0, 8.0]),
    ) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let anchor: Vec<Point> = (0..3).map(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]).collect();
        let wq = wave(rng.gen_range(0.0..2.0 * PI), 1, eta_q, kappa, &anchor);
        let wr = wave(rng.gen_range(0.0..2.0 * PI), -1, eta_r, kappa, &anchor);
        let (a, b) = (anchor[0], anchor[1]);
        let exact = edge_integral(a, b, &wq, &wr);
        let quad = quad_edge(a, b, &wq, &wr, 256);
        let scale = quad_edge(a, b, &wq, &wq, 256).norm().sqrt() * quad_edge(a, b, &wr, &wr, 256).norm().sqrt();
        prop_assert!((exact - quad).norm() <= 1e-12 * quad.norm().max(1e-3 * scale));
    }
}
