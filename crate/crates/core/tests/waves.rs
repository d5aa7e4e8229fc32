mod common;

use proptest::prelude::*;
use std::f64::consts::PI;
use trefftz_epw::error::WaveError;
use trefftz_epw::mesh::Mesh;
use trefftz_epw::waves::*;
use trefftz_epw::C64;

// First points of the unscrambled 3D Sobol sequence (scipy.stats.qmc, which
// enumerates in Gray-code order; the sets of the first 2^k points agree).
const SOBOL: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [0.5, 0.5, 0.5],
    [0.75, 0.25, 0.25],
    [0.25, 0.75, 0.75],
    [0.375, 0.375, 0.625],
    [0.875, 0.875, 0.125],
    [0.625, 0.125, 0.875],
    [0.125, 0.625, 0.375],
];

#[test]
fn sobol_matches_reference_sequence() {
    assert_eq!(sobol3(0), [0.0; 3]);
    assert_eq!(sobol3(1), [0.5; 3]);
    for k in 0..=3 {
        let n = 1usize << k;
        let key = |p: &[f64; 3]| p.map(|x| (x * 8.0) as u32);
        let mut ours: Vec<_> = (0..n as u32).map(|i| key(&sobol3(i))).collect();
        let mut reference: Vec<_> = SOBOL[..n].iter().map(key).collect();
        ours.sort();
        reference.sort();
        assert_eq!(ours, reference, "first {n} points");
    }
}

#[test]
fn sobol_dyadic_net() {
    for dim in 0..3 {
        let mut bins = [0usize; 16];
        for i in 0..1024 {
            bins[(sobol3(i)[dim] * 16.0) as usize] += 1;
        }
        assert!(bins.iter().all(|&b| b == 64), "dim {dim}: {bins:?}");
    }
}

#[test]
fn constructor_examples() {
    let w = EpwParams::new(0.0, 1, 0.0, 1.0).unwrap();
    assert_eq!(w.d, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let w = EpwParams::new(0.0, 1, 1.0, 1.0).unwrap();
    assert!((w.d[0] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
    assert!((w.d[1] - C64::new(0.0, 1.0)).norm() < 1e-15);
    assert!((w.d_dot_d() - 1.0).norm() < 1e-15);
    assert_eq!(EpwParams::new(0.0, 1, -1.0, 1.0), Err(WaveError::NegativeEta(-1.0)));
    assert_eq!(EpwParams::new(0.0, 0, 1.0, 1.0), Err(WaveError::BadSide(0)));
    assert_eq!(EpwParams::new(0.0, 1, 1.0, 0.0), Err(WaveError::BadKappa(0.0)));
}

#[test]
fn evaluation_examples() {
    let w = EpwParams::new(0.7, -1, 3.0, 5.0).unwrap();
    assert_eq!(w.eval([0.0, 0.0]), C64::new(1.0, 0.0));
    let e = w.evanescence_direction();
    let t = 1.0 / (w.kappa * w.eta);
    assert!((w.eval([e[0] * t, e[1] * t]).norm() - (-1f64).exp()).abs() < 1e-14);
    let p = EpwParams::propagative(0.0, 16.0).unwrap();
    let x = [0.31, -0.2];
    assert!((p.eval(x).norm() - 1.0).abs() < 1e-15);
    let g = p.grad(x);
    let expected = C64::new(0.0, 16.0) * C64::from_polar(1.0, 16.0 * x[0]);
    assert!((g[0] - expected).norm() < 1e-13 && g[1].norm() < 1e-13);
}

#[test]
fn underflow_saturates() {
    let w = EpwParams::new(0.0, 1, 1e6, 1e3).unwrap();
    let v = w.eval([0.0, 1.0]);
    assert!(v.norm() >= UNDERFLOW_FLOOR * 0.999 && v.norm() <= UNDERFLOW_FLOOR * 1.001);
}

fn triangle() -> Mesh {
    Mesh::new(vec![[0.1, 0.0], [0.4, 0.05], [0.2, 0.3]], vec![[0, 1, 2]]).unwrap()
}

#[test]
fn small_budget_gives_only_plane_waves() {
    let m = triangle();
    let (kappa, diam) = (40.0, m.element_diameter(0));
    // 2L = P / 2 <= kappa diam
    let p = (2.0 * kappa * diam).floor() as usize;
    let waves = sample_basis(&m, 0, p, kappa, BasisMode::Epw, 0).unwrap();
    assert!(waves.iter().all(|w| w.params.zeta == 1.0 && w.params.eta == 0.0));
}

#[test]
fn ppw_mode_is_unimodular() {
    let m = triangle();
    let waves = sample_basis(&m, 0, 200, 16.0, BasisMode::Ppw, 7).unwrap();
    for w in waves {
        assert_eq!(w.params.eta, 0.0);
        assert!(w.norm_factor() == 1.0 || w.log_norm.abs() < 1e-15);
    }
}

#[test]
fn evanescent_fraction() {
    let m = triangle();
    let kappa = 16.0;
    let diam = m.element_diameter(0);
    let p = (4.0 * kappa * diam * 10.0).round() as usize;
    let waves = sample_basis(&m, 0, p, kappa, BasisMode::Epw, 0).unwrap();
    let frac = waves.iter().filter(|w| w.params.zeta > 1.0).count() as f64 / p as f64;
    let expected = 1.0 - kappa * diam / (2.0 * p as f64 / 4.0);
    assert!((frac - expected).abs() < 0.05, "{frac} vs {expected}");
}

#[test]
fn ppw_and_epw_agree_when_clamped() {
    let m = triangle();
    let a = sample_basis(&m, 0, 6, 40.0, BasisMode::Epw, 3).unwrap();
    let b = sample_basis(&m, 0, 6, 40.0, BasisMode::Ppw, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bases_are_deterministic_and_disjoint() {
    let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.2, 4).unwrap();
    let a = build_bases(&m, 20, 1.1, 16.0, BasisMode::Epw, 0).unwrap();
    let b = build_bases(&m, 20, 1.1, 16.0, BasisMode::Epw, 0).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.trial, y.trial);
        assert_eq!(x.test, y.test);
        assert_eq!(x.trial.len(), 20);
        assert_eq!(x.test.len(), 22);
        for t in &x.test {
            assert!(x.trial.iter().all(|w| w.params.theta != t.params.theta));
        }
    }
    assert_eq!(test_count(10, 1.1), 11);
    assert_eq!(test_count(64, 1.1), 71);
    assert_eq!(test_count(7, 1.0), 7);
}

proptest! {
    #[test]
    fn direction_identities(theta in 0.0f64..2.0 * PI, up in any::<bool>(), eta in 0.0f64..50.0, kappa in 0.1f64..200.0) {
        let w = EpwParams::new(theta, if up { 1 } else { -1 }, eta, kappa).unwrap();
        let scale = 1.0 + eta * eta;
        prop_assert!((w.d_dot_d() - 1.0).norm() <= 1e-14 * scale);
        let re = [w.d[0].re, w.d[1].re];
        let im = [w.d[0].im, w.d[1].im];
        let n2 = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
        prop_assert!((n2(re) - n2(im) - 1.0).abs() <= 1e-14 * scale);
        prop_assert!((re[0] * im[0] + re[1] * im[1]).abs() <= 1e-14 * scale);
        if eta == 0.0 {
            prop_assert!(im == [0.0, 0.0]);
        }
    }

    #[test]
    fn gradient_by_finite_differences(theta in 0.0f64..2.0 * PI, x0 in -0.3f64..0.3, x1 in -0.3f64..0.3) {
        let w = EpwParams::new(theta, 1, 2.0, 16.0).unwrap();
        let x = [x0, x1];
        let g = w.grad(x);
        let fd = common::fd_grad(|y| w.eval(y), x, 1e-6);
        let err = ((g[0] - fd[0]).norm_sqr() + (g[1] - fd[1]).norm_sqr()).sqrt();
        let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        prop_assert!(err <= 1e-6 * norm);
    }

    #[test]
    fn normalized_waves_bounded_in_element(seed in 0u64..10_000, p in 1usize..300, kappa in 1.0f64..64.0, offset in 0u32..1000) {
        let mut rng = common::rng(seed);
        let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.3, seed).unwrap();
        let elem = (seed % m.num_elements() as u64) as usize;
        let verts = m.element_vertices(elem);
        let waves = sample_basis(&m, elem, p, kappa, BasisMode::Epw, offset).unwrap();
        for w in &waves {
            let vmax = verts.iter().map(|&v| w.eval(v).norm()).fold(0.0, f64::max);
            prop_assert!((vmax - 1.0).abs() < 1e-12);
            prop_assert!((w.params.d_dot_d() - 1.0).norm() <= 1e-14 * (1.0 + w.params.eta * w.params.eta));
        }
        for _ in 0..100 {
            let x = common::point_in_triangle(&mut rng, verts);
            for w in &waves {
                prop_assert!(w.eval(x).norm() <= 1.0 + 1e-12);
            }
        }
    }
}
