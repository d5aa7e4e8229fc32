mod common;

use trefftz_epw::assembly::*;
use trefftz_epw::linalg::{svd, CMatrix, LuFactors};
use trefftz_epw::mesh::Mesh;
use trefftz_epw::regsolve::*;
use trefftz_epw::waves::*;
use trefftz_epw::C64;

fn system(mesh: &Mesh, p: usize, kappa: f64, mode: BasisMode) -> (Vec<ElementBasis>, UwvfSystem) {
    let bases = build_bases(mesh, p, 1.1, kappa, mode, 0).unwrap();
    let u = EpwParams::propagative(0.3, kappa).unwrap();
    let g = manufacture_g(u, 1.0, kappa);
    let sys = assemble_system(mesh, &bases, Impedance::default(), &g);
    (bases, sys)
}

#[test]
fn svd_examples() {
    let id = CMatrix::identity(3);
    let f = complex_svd(&id, DEFAULT_EPSILON).unwrap();
    assert_eq!(f.s, vec![1.0; 3]);
    assert!(f.u.sub(&id).unwrap().norm_fro() < 1e-15);
    assert!(f.v.sub(&id).unwrap().norm_fro() < 1e-15);

    let a = CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ]);
    let f = complex_svd(&a, DEFAULT_EPSILON).unwrap();
    for (s, e) in f.s.iter().zip([3.0, 2.0, 1.0]) {
        assert!((s - e).abs() < 1e-15);
    }
}

#[test]
fn svd_matches_jacobi_oracle() {
    let mut rng = common::rng(40);
    let a = common::random_matrix(&mut rng, 40, 32);
    let f = svd(&a).unwrap();
    assert!(f.reconstruct().sub(&a).unwrap().norm_fro() <= 1e-12 * a.norm_fro());
    let oracle = common::jacobi_singular_values(&a);
    for (s, o) in f.s.iter().zip(&oracle) {
        assert!((s - o).abs() <= 1e-10, "{s} vs {o}");
    }
}

#[test]
fn pinv_examples() {
    let mut rng = common::rng(5);
    let a = common::random_matrix(&mut rng, 12, 12);
    let f = complex_svd(&a, DEFAULT_EPSILON).unwrap();
    let p = truncated_pinv(&f, DEFAULT_EPSILON).unwrap();
    assert_eq!(p.rank, 12);
    let prod = a.matmul(&p.data).unwrap();
    assert!(prod.sub(&CMatrix::identity(12)).unwrap().norm_fro() < 1e-10);

    let d = CMatrix::from_diag(2, 2, &[1.0, 1e-15]);
    let f = complex_svd(&d, 1e-14).unwrap();
    assert_eq!(f.rank_eps, 1);
    assert_eq!(truncation_rank(&[1.0, 1e-15], 1e-14), 1);

    let mut scaled = a.clone();
    scaled.scale(C64::new(7.5, 0.0));
    let fs = complex_svd(&scaled, DEFAULT_EPSILON).unwrap();
    let ps = truncated_pinv(&fs, DEFAULT_EPSILON).unwrap();
    assert_eq!(ps.rank, p.rank);
    let mut expected = p.data.clone();
    expected.scale(C64::new(1.0 / 7.5, 0.0));
    assert!(ps.data.sub(&expected).unwrap().norm_fro() <= 1e-12 * expected.norm_fro());
}

fn retained_identity_error(blk: &CMatrix) -> (f64, f64) {
    let f = complex_svd(blk, DEFAULT_EPSILON).unwrap();
    let p = truncated_pinv(&f, DEFAULT_EPSILON).unwrap();
    let r = f.rank_eps;
    let vr = CMatrix::from_fn(f.v.rows(), r, |i, j| f.v.col(j)[i]);
    let m = vr.adjoint().matmul(&p.data.matmul(blk).unwrap()).unwrap().matmul(&vr).unwrap();
    (m.sub(&CMatrix::identity(r)).unwrap().norm_fro(), f.s[0] / f.s[r - 1])
}

#[test]
fn pinv_is_identity_on_retained_subspace() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.1, 1).unwrap();
    let (_, sys) = system(&mesh, 8, 16.0, BasisMode::Ppw);
    for blk in &sys.d.blocks {
        let (err, cond) = retained_identity_error(&blk.data);
        assert!(cond < 1e5);
        assert!(err <= 1e-10, "{err:e}");
    }
    // nearly dependent waves: rounding in D is amplified by the retained
    // condition number
    let (_, sys) = system(&mesh, 40, 16.0, BasisMode::Ppw);
    for blk in &sys.d.blocks {
        let (err, cond) = retained_identity_error(&blk.data);
        assert!(err <= 1e-14 * cond, "{err:e} at condition {cond:e}");
    }
}

#[test]
fn decoupled_solve_is_blockwise_pinv() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 1, 0.0, 0).unwrap();
    let (_, sys) = system(&mesh, 10, 6.0, BasisMode::Epw);
    let zero = BlockMatrix {
        row_offsets: sys.c.row_offsets.clone(),
        col_offsets: sys.c.col_offsets.clone(),
        blocks: vec![],
    };
    let rep = solve_uwvf(&sys.d, &zero, &sys.b, DEFAULT_EPSILON).unwrap();
    let direct = rep.inverse.apply(&sys.b);
    assert!(common::vec_rel_err(&rep.coefficients, &direct) < 1e-10);
}

#[test]
fn one_element_recovers_basis_wave() {
    let mesh = Mesh::new(vec![[0.0, 0.0], [0.5, 0.1], [0.2, 0.4]], vec![[0, 1, 2]]).unwrap();
    let kappa = 8.0;
    let trial = sample_basis(&mesh, 0, 7, kappa, BasisMode::Ppw, 0).unwrap();
    let test = sample_basis(&mesh, 0, 8, kappa, BasisMode::Ppw, 7).unwrap();
    for j in [0, 3, 6] {
        let target = trial[j];
        let bases = vec![ElementBasis {
            elem: 0,
            trial: trial.clone(),
            test: test.clone(),
        }];
        // the normalized wave is the plain wave times a unit-modulus factor
        let g = manufacture_g(target.params, 1.0, kappa);
        let sys = assemble_system(&mesh, &bases, Impedance::default(), &g);
        let rep = solve_uwvf(&sys.d, &sys.c, &sys.b, DEFAULT_EPSILON).unwrap();
        let scale = target.norm_factor();
        for (i, c) in rep.coefficients.iter().enumerate() {
            let expected = if i == j { scale } else { 0.0 };
            assert!((c - expected).norm() < 1e-8, "wave {j}, coefficient {i}: {c}");
        }
    }
}

#[test]
fn solve_is_linear() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.2, 3).unwrap();
    let (_, sys) = system(&mesh, 16, 8.0, BasisMode::Epw);
    let a = solve_uwvf(&sys.d, &sys.c, &sys.b, DEFAULT_EPSILON).unwrap();
    // a power of two scales every intermediate exactly
    let b8: Vec<C64> = sys.b.iter().map(|z| z * 8.0).collect();
    let b = solve_uwvf(&sys.d, &sys.c, &b8, DEFAULT_EPSILON).unwrap();
    let a8: Vec<C64> = a.coefficients.iter().map(|z| z * 8.0).collect();
    assert_eq!(b.coefficients, a8);
    let b10: Vec<C64> = sys.b.iter().map(|z| z * 10.0).collect();
    let b = solve_uwvf(&sys.d, &sys.c, &b10, DEFAULT_EPSILON).unwrap();
    let a10: Vec<C64> = a.coefficients.iter().map(|z| z * 10.0).collect();
    assert!(common::vec_rel_err(&b.coefficients, &a10) < 1e-9);
}

#[test]
fn matches_unregularized_solve_when_well_conditioned() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.2, 3).unwrap();
    let kappa = 8.0;
    let bases: Vec<ElementBasis> = (0..mesh.num_elements())
        .map(|elem| {
            let trial = sample_basis(&mesh, elem, 6, kappa, BasisMode::Ppw, 1).unwrap();
            ElementBasis {
                elem,
                test: trial.clone(),
                trial,
            }
        })
        .collect();
    let g = manufacture_g(EpwParams::propagative(1.0, kappa).unwrap(), 1.0, kappa);
    let sys = assemble_system(&mesh, &bases, Impedance::default(), &g);
    let rep = solve_uwvf(&sys.d, &sys.c, &sys.b, DEFAULT_EPSILON).unwrap();
    assert!(rep.blocks.iter().all(|b| b.rank == b.n_trial));
    let m = sys.d.to_dense().sub(&sys.c.to_dense()).unwrap();
    let n = m.rows();
    let lu = LuFactors::factor(m, n - 1, n - 1).unwrap();
    let u = lu.solve(&sys.b);
    assert!(common::vec_rel_err(&rep.coefficients, &u) < 1e-8);
}

#[test]
fn report_surfaces_block_diagnostics() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.2, 3).unwrap();
    let (bases, sys) = system(&mesh, 24, 8.0, BasisMode::Ppw);
    let rep = solve_uwvf(&sys.d, &sys.c, &sys.b, DEFAULT_EPSILON).unwrap();
    assert_eq!(rep.blocks.len(), mesh.num_elements());
    for (b, basis) in rep.blocks.iter().zip(&bases) {
        assert_eq!(b.n_trial, basis.trial.len());
        assert_eq!(b.n_test, basis.test.len());
        assert!(b.sigma_max >= b.sigma_min && b.rank >= 1 && b.rank <= b.n_trial);
    }
    assert!(rep.relative_residual() < 1e-8);
    assert!(!rep.residual_warning);
    assert_eq!(rep.coefficients.len(), mesh.num_elements() * 24);
}

#[test]
fn rejects_bad_inputs() {
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1, 0.0, 0).unwrap();
    let (_, sys) = system(&mesh, 4, 4.0, BasisMode::Ppw);
    for eps in [0.0, -1.0, 1.0, f64::NAN] {
        assert!(matches!(solve_uwvf(&sys.d, &sys.c, &sys.b, eps), Err(SolveError::BadEpsilon(_))));
    }
    let short = &sys.b[1..];
    assert!(matches!(solve_uwvf(&sys.d, &sys.c, short, DEFAULT_EPSILON), Err(SolveError::Dimension(_))));
}
