//! Trefftz discretization of the 2D Helmholtz impedance problem with
//! propagative and evanescent plane waves.
//!
//! The pipeline is: build a [`mesh::Mesh`], sample per-element wave bases
//! ([`waves::build_bases`]), assemble the ultraweak system
//! ([`assembly::assemble_system`]), solve it with blockwise SVD
//! regularization ([`regsolve::solve_uwvf`]) and measure the result
//! ([`analysis`]).

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod regsolve;
pub mod specialfn;
pub mod waves;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
