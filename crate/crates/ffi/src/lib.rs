//! C ABI for the solver.
//!
//! Handles are opaque pointers created by `te_*_create`/`te_*_load`/
//! `te_solve_*` and released with the matching `te_*_free`. Every fallible
//! call returns a [`TeStatus`]; on failure, `te_last_error` gives a message
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trefftz_epw::analysis::{ndof, DiscreteField};
use trefftz_epw::assembly::Impedance;
use trefftz_epw::experiment::{run_point_source, RunOutcome, RunSettings};
use trefftz_epw::mesh::Mesh;
use trefftz_epw::waves::{BasisMode, ElementBasis};
use trefftz_epw::{Error, C64};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Mesh = 3,
    Solve = 4,
    Io = 5,
    OutsideDomain = 6,
    Internal = 7,
}

/// Wave family of a basis.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TeBasisMode {
    /// Propagative plane waves.
    Ppw = 0,
    /// Evanescent plane waves.
    Epw = 1,
}

/// A triangulation.
pub struct TeMesh {
    mesh: Mesh,
}

/// A solved point-source problem: bases, coefficients and error report.
pub struct TeSolution {
    mesh: Mesh,
    bases: Vec<ElementBasis>,
    coefficients: Vec<C64>,
    rel_error: f64,
    coeff_norm: f64,
}

/// Parameters of a point-source solve.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TeSolveParams {
    pub kappa: f64,
    /// Trial waves per element.
    pub p: usize,
    pub mode: TeBasisMode,
    /// Relative singular-value cutoff, e.g. `1e-14`.
    pub epsilon: f64,
    /// Test-to-trial ratio, at least 1.
    pub oversampling: f64,
    pub source_x: f64,
    pub source_y: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> TeStatus {
    match err {
        Error::Mesh(_) => TeStatus::Mesh,
        Error::OutsideDomain(..) => TeStatus::OutsideDomain,
        Error::Io(_) => TeStatus::Io,
        Error::Config(_) | Error::Wave(_) | Error::Dimension(_) => TeStatus::InvalidArgument,
        Error::Solve(_) | Error::Linalg(_) | Error::SpecialFn(_) => TeStatus::Solve,
    }
}

/// Runs `f`, converting errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), (TeStatus, String)>) -> TeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TeStatus::Internal
        }
    }
}

fn lib_err(e: impl Into<Error>) -> (TeStatus, String) {
    let e = e.into();
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TeStatus, String) {
    (TeStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn te_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn te_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Structured triangulation of a rectangle with seeded interior jitter.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_create_rectangle(
    lower_x: f64,
    lower_y: f64,
    upper_x: f64,
    upper_y: f64,
    nx: usize,
    ny: usize,
    jitter: f64,
    seed: u64,
    out: *mut *mut TeMesh,
) -> TeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let mesh = Mesh::rectangle([lower_x, lower_y], [upper_x, upper_y], nx, ny, jitter, seed).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TeMesh { mesh }));
        Ok(())
    })
}

/// Reads a mesh in the ASCII `ntv` format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_load(path: *const c_char, out: *mut *mut TeMesh) -> TeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (TeStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let mesh = Mesh::load(path).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TeMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_free(mesh: *mut TeMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of triangles, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_num_elements(mesh: *const TeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.num_elements())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_num_vertices(mesh: *const TeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.vertices().len())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_mesh_num_edges(mesh: *const TeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.edges().len())
}

/// Solves the impedance problem whose exact solution is the outgoing point
/// source at `(source_x, source_y)` and measures the relative `H^1` error.
/// The solution keeps its own copy of the mesh.
///
/// # Safety
/// `mesh` and `params` must be live, `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn te_solve_point_source(
    mesh: *const TeMesh,
    params: *const TeSolveParams,
    out: *mut *mut TeSolution,
) -> TeStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.mesh;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let invalid = |m: &str| (TeStatus::InvalidArgument, m.to_string());
        if p.p == 0 {
            return Err(invalid("p must be at least 1"));
        }
        if !(p.oversampling >= 1.0 && p.oversampling.is_finite()) {
            return Err(invalid("oversampling must be >= 1"));
        }
        if !(p.source_x.is_finite() && p.source_y.is_finite()) {
            return Err(invalid("source must be finite"));
        }
        let settings = RunSettings {
            kappa: p.kappa,
            impedance: Impedance::default(),
            p: p.p,
            mode: match p.mode {
                TeBasisMode::Ppw => BasisMode::Ppw,
                TeBasisMode::Epw => BasisMode::Epw,
            },
            epsilon: p.epsilon,
            oversampling: p.oversampling,
            stream_offset: 0,
        };
        let RunOutcome { bases, solve, error } =
            run_point_source(mesh, &settings, [p.source_x, p.source_y]).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TeSolution {
            mesh: mesh.clone(),
            bases,
            coefficients: solve.coefficients,
            rel_error: error.rel_error,
            coeff_norm: solve.coeff_norm,
        }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn te_solution_free(sol: *mut TeSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Kappa-weighted relative `H^1` error, NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_solution_rel_error(sol: *const TeSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.rel_error)
}

/// Euclidean norm of the coefficient vector, NaN for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_solution_coeff_norm(sol: *const TeSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.coeff_norm)
}

/// Total number of trial degrees of freedom, 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn te_solution_ndof(sol: *const TeSolution) -> usize {
    sol.as_ref().map_or(0, |s| ndof(&s.bases))
}

/// Value of the discrete solution at `(x, y)`.
///
/// # Safety
/// `sol` must be live; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn te_solution_eval(sol: *const TeSolution, x: f64, y: f64, re: *mut f64, im: *mut f64) -> TeStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let re = re.as_mut().ok_or_else(|| null("re"))?;
        let im = im.as_mut().ok_or_else(|| null("im"))?;
        let field = DiscreteField::new(&s.mesh, &s.bases, &s.coefficients).map_err(lib_err)?;
        let (v, _) = field.eval([x, y]).map_err(lib_err)?;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}
