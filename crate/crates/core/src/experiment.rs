//! Experiment drivers behind the command-line tool: point-source
//! convergence, wavenumber sweep, coefficient-size probe and self-test.
//! Every CSV ends with a `# config-hash=..., version=...` line and is
//! written atomically.

use num_complex::Complex64 as C64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{h1_error, ndof, stability_probe, DiscreteField, ErrorReport};
use crate::assembly::{assemble_system, edge_integral, manufacture_g, Impedance, PointSource};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::mesh::{Mesh, Point};
use crate::quadrature::GaussLegendre;
use crate::regsolve::{solve_uwvf, SolveReport};
use crate::specialfn::{bessel_j, bessel_y};
use crate::waves::{build_bases, BasisMode, ElementBasis, EpwParams, NormalizedWave};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters of one discretization of the impedance problem.
#[derive(Clone, Copy, Debug)]
pub struct RunSettings {
    pub kappa: f64,
    pub impedance: Impedance,
    pub p: usize,
    pub mode: BasisMode,
    pub epsilon: f64,
    pub oversampling: f64,
    pub stream_offset: u32,
}

impl RunSettings {
    pub fn from_config(cfg: &ExperimentConfig, kappa: f64, p: usize, mode: BasisMode) -> Self {
        RunSettings {
            kappa,
            impedance: Impedance {
                boundary: cfg.sigma,
                interior: cfg.sigma,
            },
            p,
            mode,
            epsilon: cfg.epsilon,
            oversampling: cfg.oversampling,
            stream_offset: cfg.stream_offset,
        }
    }
}

/// Bases, solve diagnostics and error of one run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub bases: Vec<ElementBasis>,
    pub solve: SolveReport,
    pub error: ErrorReport,
}

impl RunOutcome {
    pub fn field<'a>(&'a self, mesh: &'a Mesh) -> Result<DiscreteField<'a>> {
        DiscreteField::new(mesh, &self.bases, &self.solve.coefficients)
    }
}

/// Solves the impedance problem whose exact solution is `reference` and
/// measures the error.
pub fn run_manufactured<F: crate::assembly::ReferenceField>(
    mesh: &Mesh,
    settings: &RunSettings,
    reference: &F,
) -> Result<RunOutcome> {
    let bases = build_bases(
        mesh,
        settings.p,
        settings.oversampling,
        settings.kappa,
        settings.mode,
        settings.stream_offset,
    )?;
    let g = manufacture_g(reference, settings.impedance.boundary, settings.kappa);
    let sys = assemble_system(mesh, &bases, settings.impedance, &g);
    let solve = solve_uwvf(&sys.d, &sys.c, &sys.b, settings.epsilon)?;
    let field = DiscreteField::new(mesh, &bases, &solve.coefficients)?;
    let error = h1_error(&field, reference, settings.kappa);
    Ok(RunOutcome {
        bases,
        solve,
        error,
    })
}

pub fn run_point_source(mesh: &Mesh, settings: &RunSettings, source: Point) -> Result<RunOutcome> {
    let reference = PointSource {
        source,
        kappa: settings.kappa,
    };
    run_manufactured(mesh, settings, &reference)
}

/// CSV text accumulated in memory and written atomically.
pub struct CsvTable {
    text: String,
    comments: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        CsvTable {
            text: format!("{header}\n"),
            comments: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn finish(mut self, config_hash: &str) -> String {
        for c in &self.comments {
            let _ = writeln!(self.text, "# {}", c.replace('\n', " "));
        }
        let _ = writeln!(self.text, "# config-hash={config_hash}, version={VERSION}");
        self.text
    }

    pub fn write(self, path: &Path, config_hash: &str) -> Result<()> {
        write_atomic(path, &self.finish(config_hash))
    }
}

/// Shortest round-trip representation; `NaN` for failures.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:e}")
    }
}

pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Cell-centred samples `x,y,re_u,abs_err` of a solution on the bounding box.
pub fn field_grid_csv(
    mesh: &Mesh,
    field: &DiscreteField<'_>,
    reference: &dyn crate::assembly::ReferenceField,
    grid: usize,
) -> CsvTable {
    let (lo, hi) = mesh.bounding_box();
    let mut t = CsvTable::new("x,y,re_u,abs_err");
    for j in 0..grid {
        let y = lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / grid as f64;
        for i in 0..grid {
            let x = lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / grid as f64;
            let (re_u, err) = match field.eval([x, y]) {
                Ok((uh, _)) => (uh.re, (uh - reference.value([x, y])).norm()),
                Err(_) => (f64::NAN, f64::NAN),
            };
            t.row(&[fmt_f64(x), fmt_f64(y), fmt_f64(re_u), fmt_f64(err)]);
        }
    }
    t
}

/// Point-source convergence in the per-element budget `P`. Returns the
/// files written.
pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mesh = cfg.mesh.build()?;
    let hash = cfg.hash();
    let kappa = cfg.kappa;
    let source = cfg.source_for(kappa);
    let reference = PointSource { source, kappa };
    let mut table = CsvTable::new(
        "mode,P,ndof_total,rel_h1_error,coeff_norm,min_rank_ratio,sigma_min_over_max",
    );
    let mut written = Vec::new();
    let pmax = *cfg.p_list.iter().max().unwrap();
    for &mode in &cfg.modes {
        for &p in &cfg.p_list {
            let settings = RunSettings::from_config(cfg, kappa, p, mode);
            log::info!("convergence: {mode} P={p}");
            match run_point_source(&mesh, &settings, source) {
                Ok(run) => {
                    table.row(&[
                        mode.to_string(),
                        p.to_string(),
                        ndof(&run.bases).to_string(),
                        fmt_f64(run.error.rel_error),
                        fmt_f64(run.solve.coeff_norm),
                        fmt_f64(run.solve.min_rank_ratio()),
                        fmt_f64(run.solve.sigma_min_over_max()),
                    ]);
                    if run.solve.residual_warning {
                        table.comment(format!(
                            "warning: mode={mode} P={p} relative residual {:e}",
                            run.solve.relative_residual()
                        ));
                    }
                    if p == pmax {
                        let field = run.field(&mesh)?;
                        let path = cfg.out_dir.join(format!("field_{mode}_P{p}.csv"));
                        field_grid_csv(&mesh, &field, &reference, cfg.grid).write(&path, &hash)?;
                        written.push(path);
                    }
                }
                Err(e) => {
                    log::error!("convergence: {mode} P={p} failed: {e}");
                    let nan = fmt_f64(f64::NAN);
                    table.row(&[
                        mode.to_string(),
                        p.to_string(),
                        (p * mesh.num_elements()).to_string(),
                        nan.clone(),
                        nan.clone(),
                        nan.clone(),
                        nan,
                    ]);
                    table.comment(format!("failed: mode={mode} P={p}: {e}"));
                }
            }
        }
    }
    let path = cfg.out_dir.join("convergence.csv");
    table.write(&path, &hash)?;
    written.insert(0, path);
    Ok(written)
}

/// Both modes at `P = 4 kappa` for each wavenumber of the sweep on a fixed
/// mesh, with the source at `(-pi / (5 kappa), 0)`.
pub fn cmd_ksweep(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let mesh = cfg.mesh.build()?;
    let mut table = CsvTable::new("kappa,mode,P,rel_h1_error,coeff_norm");
    for &kappa in &cfg.kappa_list {
        let p = (4.0 * kappa).round() as usize;
        let source = cfg.source_for(kappa);
        for mode in [BasisMode::Ppw, BasisMode::Epw] {
            let settings = RunSettings::from_config(cfg, kappa, p, mode);
            log::info!("ksweep: kappa={kappa} {mode} P={p}");
            let (err, norm) = match run_point_source(&mesh, &settings, source) {
                Ok(run) => (run.error.rel_error, run.solve.coeff_norm),
                Err(e) => {
                    log::error!("ksweep: kappa={kappa} {mode} failed: {e}");
                    table.comment(format!("failed: kappa={kappa} mode={mode} P={p}: {e}"));
                    (f64::NAN, f64::NAN)
                }
            };
            table.row(&[fmt_f64(kappa), mode.to_string(), p.to_string(), fmt_f64(err), fmt_f64(norm)]);
        }
    }
    let path = cfg.out_dir.join("ksweep.csv");
    table.write(&path, &cfg.hash())?;
    Ok(path)
}

/// Coefficient size of least-squares fits of circular waves on the unit disc.
pub fn cmd_stability(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let mut table = CsvTable::new("m,mode,P,delta,mu_norm");
    for &m in &cfg.m_list {
        for mode in [BasisMode::Ppw, BasisMode::Epw] {
            for &p in &cfg.stability_p_list {
                log::info!("stability: m={m} {mode} P={p}");
                let (delta, mu) = match stability_probe(m, cfg.kappa, p, mode, cfg.epsilon) {
                    Ok(r) => (r.delta, r.mu_norm),
                    Err(e) => {
                        table.comment(format!("failed: m={m} mode={mode} P={p}: {e}"));
                        (f64::NAN, f64::NAN)
                    }
                };
                table.row(&[m.to_string(), mode.to_string(), p.to_string(), fmt_f64(delta), fmt_f64(mu)]);
            }
        }
    }
    let path = cfg.out_dir.join("stability.csv");
    table.write(&path, &cfg.hash())?;
    Ok(path)
}

/// One line of the self-test table.
#[derive(Clone, Debug)]
pub struct SelfTestResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl SelfTestResult {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn selftest_edge_integrals() -> f64 {
    let kappa = 16.0;
    let anchor = [[0.0, 0.0], [0.3, 0.1], [0.1, 0.35]];
    let gl = GaussLegendre::new(128);
    let mut worst = 0.0f64;
    for (i, &(eta_q, eta_r)) in [(0.0, 0.0), (1.0, 0.0), (1.0, 8.0), (8.0, 8.0)].iter().enumerate() {
        let t = i as f64;
        let wq = NormalizedWave::new(EpwParams::new(0.3 + t, 1, eta_q, kappa).unwrap(), &anchor);
        let wr = NormalizedWave::new(EpwParams::new(2.1 - t, -1, eta_r, kappa).unwrap(), &anchor);
        let (a, b) = (anchor[1], anchor[2]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let quad = gl.integrate(|s| {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            wq.eval(x) * wr.eval(x).conj() * len
        });
        let exact = edge_integral(a, b, &wq, &wr);
        worst = worst.max((exact - quad).norm() / quad.norm());
    }
    worst
}

fn selftest_svd() -> f64 {
    let (m, n) = (40, 32);
    let a = CMatrix::from_fn(m, n, |i, j| {
        let t = (i * 31 + j * 17) as f64;
        C64::new((0.37 * t).sin(), (0.21 * t + 1.0).cos())
    });
    match crate::linalg::svd(&a) {
        Ok(f) => {
            let r = f.reconstruct().sub(&a).map(|d| d.norm_fro()).unwrap_or(f64::INFINITY);
            r / a.norm_fro()
        }
        Err(_) => f64::INFINITY,
    }
}

fn selftest_wronskian() -> f64 {
    // J_1 Y_0 - J_0 Y_1 = 2 / (pi x)
    (1..=40)
        .map(|i| {
            let x = 0.75 * i as f64;
            let w = bessel_j(1, x) * bessel_y(0, x).unwrap() - bessel_j(0, x) * bessel_y(1, x).unwrap();
            (w * std::f64::consts::PI * x / 2.0 - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn selftest_manufactured() -> f64 {
    let kappa = 8.0;
    let Ok(mesh) = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2, 0.1, 3) else {
        return f64::INFINITY;
    };
    let settings = RunSettings {
        kappa,
        impedance: Impedance::default(),
        p: 12,
        mode: BasisMode::Epw,
        epsilon: 1e-14,
        oversampling: 1.1,
        stream_offset: 0,
    };
    // Sobol index 0 is the plane wave along +x, present in every basis
    match EpwParams::propagative(0.0, kappa) {
        Ok(w) => run_manufactured(&mesh, &settings, &w).map_or(f64::INFINITY, |r| r.error.rel_error),
        Err(_) => f64::INFINITY,
    }
}

pub fn selftest() -> Vec<SelfTestResult> {
    vec![
        SelfTestResult {
            name: "edge integrals vs quadrature",
            value: selftest_edge_integrals(),
            tolerance: 1e-12,
        },
        SelfTestResult {
            name: "SVD reconstruction",
            value: selftest_svd(),
            tolerance: 1e-12,
        },
        SelfTestResult {
            name: "Bessel Wronskian",
            value: selftest_wronskian(),
            tolerance: 1e-10,
        },
        SelfTestResult {
            name: "manufactured plane wave",
            value: selftest_manufactured(),
            tolerance: 1e-8,
        },
    ]
}
