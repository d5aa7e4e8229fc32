//! Propagative and evanescent plane waves `x -> exp(i kappa d.x)` with a
//! complex direction `d`, `d.d = 1`, and the quasi-random sampling recipe
//! that builds an `L^inf`-normalized element basis from a DOF budget.
//!
//! In 2D a wave is parametrized by the propagation angle `theta`, the
//! evanescence side `phi = +-1` and the evanescence strength `eta >= 0`:
//!
//! ```text
//! d = zeta (cos t, sin t) + i eta phi (-sin t, cos t),   zeta = sqrt(1 + eta^2)
//! ```
//!
//! so the wave oscillates along `p = (cos t, sin t)` with apparent wavenumber
//! `kappa zeta` and decays at rate `kappa eta` along `e = phi (-sin t, cos t)`.

mod sobol;

pub use sobol::sobol3;

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::WaveError;
use crate::mesh::{Mesh, Point};

/// Magnitudes below this saturate instead of underflowing.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

fn floor_log() -> f64 {
    UNDERFLOW_FLOOR.ln()
}

/// `exp(z)` with the real part clamped from below at `ln(1e-300)`.
#[inline]
pub(crate) fn exp_saturating(z: C64) -> C64 {
    let re = z.re.max(floor_log());
    C64::from_polar(re.exp(), z.im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisMode {
    /// Propagative plane waves only (evanescence clamp always active).
    Ppw,
    /// Evanescent plane waves sampled by the recipe.
    Epw,
}

impl BasisMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisMode::Ppw => "PPW",
            BasisMode::Epw => "EPW",
        }
    }
}

impl std::str::FromStr for BasisMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ppw" => Ok(BasisMode::Ppw),
            "epw" => Ok(BasisMode::Epw),
            other => Err(format!("unknown basis mode `{other}` (expected PPW or EPW)")),
        }
    }
}

impl std::fmt::Display for BasisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpwParams {
    pub theta: f64,
    /// Evanescence side, `+1` or `-1`.
    pub phi: f64,
    pub eta: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub d: [C64; 2],
}

impl EpwParams {
    pub fn new(theta: f64, phi: i32, eta: f64, kappa: f64) -> Result<Self, WaveError> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(WaveError::NegativeEta(eta));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(WaveError::BadKappa(kappa));
        }
        if phi != 1 && phi != -1 {
            return Err(WaveError::BadSide(phi));
        }
        let phi = phi as f64;
        let zeta = eta.hypot(1.0);
        let (s, c) = theta.sin_cos();
        let d = [
            C64::new(zeta * c, -eta * phi * s),
            C64::new(zeta * s, eta * phi * c),
        ];
        Ok(EpwParams {
            theta,
            phi,
            eta,
            zeta,
            kappa,
            d,
        })
    }

    /// Plane wave along angle `theta`.
    pub fn propagative(theta: f64, kappa: f64) -> Result<Self, WaveError> {
        Self::new(theta, 1, 0.0, kappa)
    }

    pub fn propagation_direction(&self) -> Point {
        [self.theta.cos(), self.theta.sin()]
    }

    /// Unit decay direction `e`.
    pub fn evanescence_direction(&self) -> Point {
        [-self.phi * self.theta.sin(), self.phi * self.theta.cos()]
    }

    /// `i kappa d . x`, the complex exponent.
    #[inline]
    pub fn exponent(&self, x: Point) -> C64 {
        let dx = self.d[0] * x[0] + self.d[1] * x[1];
        C64::new(-dx.im, dx.re) * self.kappa
    }

    /// `i kappa d`, so that `grad EW = (i kappa d) EW`.
    #[inline]
    pub fn wave_vector(&self) -> [C64; 2] {
        let ik = C64::new(0.0, self.kappa);
        [ik * self.d[0], ik * self.d[1]]
    }

    pub fn eval(&self, x: Point) -> C64 {
        exp_saturating(self.exponent(x))
    }

    pub fn grad(&self, x: Point) -> [C64; 2] {
        let v = self.eval(x);
        self.wave_vector().map(|k| k * v)
    }

    /// `d . d` (no conjugation); equals 1 up to rounding.
    pub fn d_dot_d(&self) -> C64 {
        self.d[0] * self.d[0] + self.d[1] * self.d[1]
    }
}

/// A wave scaled by the reciprocal of its maximum modulus over a set of
/// anchor points (the element vertices).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedWave {
    pub params: EpwParams,
    /// `ln ||EW||_inf` over the anchor points.
    pub log_norm: f64,
}

impl NormalizedWave {
    pub fn new(params: EpwParams, anchor: &[Point]) -> Self {
        let log_norm = anchor
            .iter()
            .map(|&x| params.exponent(x).re)
            .fold(f64::NEG_INFINITY, f64::max);
        NormalizedWave { params, log_norm }
    }

    pub fn norm_factor(&self) -> f64 {
        self.log_norm.exp()
    }

    /// Exponent of the normalized wave: `i kappa d . x - ln ||EW||`.
    #[inline]
    pub fn exponent(&self, x: Point) -> C64 {
        self.params.exponent(x) - self.log_norm
    }

    pub fn eval(&self, x: Point) -> C64 {
        exp_saturating(self.exponent(x))
    }

    pub fn grad(&self, x: Point) -> [C64; 2] {
        let v = self.eval(x);
        self.params.wave_vector().map(|k| k * v)
    }
}

/// Trial and test waves attached to one element.
#[derive(Clone, Debug)]
pub struct ElementBasis {
    pub elem: usize,
    pub trial: Vec<NormalizedWave>,
    pub test: Vec<NormalizedWave>,
}

/// A sampled point of `[0, 2pi) x {+-1} x [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint {
    pub theta: f64,
    pub phi: i32,
    pub xi: f64,
}

impl SamplePoint {
    pub fn from_sobol(index: u32) -> Self {
        let [u1, u2, u3] = sobol3(index);
        SamplePoint {
            theta: 2.0 * PI * u1,
            phi: if u2 >= 0.5 { 1 } else { -1 },
            xi: u3,
        }
    }
}

/// Evanescence strength `zeta` for a sample, DOF budget and element size.
pub fn sampled_zeta(xi: f64, count: usize, kappa: f64, diameter: f64, mode: BasisMode) -> f64 {
    let truncation = match mode {
        BasisMode::Ppw => 0.0,
        BasisMode::Epw => count as f64 / 4.0,
    };
    (2.0 * truncation / (kappa * diameter) * xi).max(1.0)
}

/// Samples `count` normalized waves for a domain of the given `diameter`,
/// normalized over `anchor`, from Sobol indices `offset .. offset + count`.
pub fn sample_waves(
    anchor: &[Point],
    diameter: f64,
    count: usize,
    kappa: f64,
    mode: BasisMode,
    offset: u32,
) -> Result<Vec<NormalizedWave>, WaveError> {
    if count == 0 {
        return Err(WaveError::EmptyBasis);
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(WaveError::BadKappa(kappa));
    }
    (0..count)
        .map(|p| {
            let y = SamplePoint::from_sobol(offset + p as u32);
            let zeta = sampled_zeta(y.xi, count, kappa, diameter, mode);
            let eta = ((zeta - 1.0) * (zeta + 1.0)).sqrt();
            let params = EpwParams::new(y.theta, y.phi, eta, kappa)?;
            Ok(NormalizedWave::new(params, anchor))
        })
        .collect()
}

/// The recipe applied to one mesh element.
pub fn sample_basis(
    mesh: &Mesh,
    elem: usize,
    count: usize,
    kappa: f64,
    mode: BasisMode,
    offset: u32,
) -> Result<Vec<NormalizedWave>, WaveError> {
    let anchor = mesh.element_vertices(elem);
    sample_waves(&anchor, mesh.element_diameter(elem), count, kappa, mode, offset)
}

/// Number of test waves for a trial budget under the oversampling ratio.
pub fn test_count(trial: usize, oversampling: f64) -> usize {
    // guard against 1.1 * 10 = 11.000000000000002
    let raw = trial as f64 * oversampling;
    let n = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    n.max(trial)
}

/// Per-element trial bases (Sobol indices `offset ..`) and test bases
/// (the following `test_count` indices).
pub fn build_bases(
    mesh: &Mesh,
    trial: usize,
    oversampling: f64,
    kappa: f64,
    mode: BasisMode,
    offset: u32,
) -> Result<Vec<ElementBasis>, WaveError> {
    let ntest = test_count(trial, oversampling);
    (0..mesh.num_elements())
        .map(|elem| {
            Ok(ElementBasis {
                elem,
                trial: sample_basis(mesh, elem, trial, kappa, mode, offset)?,
                test: sample_basis(mesh, elem, ntest, kappa, mode, offset + trial as u32)?,
            })
        })
        .collect()
}
