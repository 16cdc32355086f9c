//! Numerical toolkit for the Kelvin-Voigt damped wave equation on a disc,
//! with a damping jump across a circular interface.
//!
//! The damping `a(x)` is the indicator of the annulus `1 < r < R0`; the unit
//! disc is undamped. Everything decouples over angular Fourier modes, so all
//! solvers here are dense-per-mode radial computations:
//!
//! * [`grid`] / [`operators`] — the radial discretization and the per-mode
//!   generator `A_m(u, v) = (v, div((grad u) + a grad v))` in conservative
//!   flux form, together with the energy inner product.
//! * [`bessel`] — Bessel functions, their zeros `lambda_{m,n}`, and the
//!   whispering-gallery Dirichlet eigenfunctions of the unit disc.
//! * [`elliptic`] — the semiclassical mixed Dirichlet-Neumann solver on the
//!   damped annulus and its Dirichlet-to-Neumann diagnostics.
//! * [`quasimode`] — the whispering-gallery quasi-mode bundle: Bessel
//!   eigenfunction, elliptic lift, exact cylindrical interface correction,
//!   residual bookkeeping.
//! * [`pencil`] — resolvent-norm scans and spectra of the per-mode generator.
//! * [`semigroup`] — implicit-midpoint time evolution with energy tracking.
//! * [`rays`] — billiard rays, boundary-point classification, and the
//!   geometric control condition check.
//! * [`report`] — the aggregate verification report.

pub mod bessel;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod pencil;
pub mod quasimode;
pub mod rays;
pub mod report;
pub mod semigroup;

pub use error::Error;
pub use field::{ModeField, ModeState};
pub use grid::{DomainSpec, RadialGrid};
pub use operators::ModeOperators;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
