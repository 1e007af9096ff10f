//! Light storage, magnetic phase manipulation, and release in a medium of
//! four-level atoms in the tripod configuration.
//!
//! The crate solves the coupled density-matrix and envelope-propagation
//! equations in the co-moving frame and carries the closed-form polariton
//! analysis alongside it, so that simulation output can be checked against
//! the analytic release laws.
//!
//! Internal units: frequencies in units of the spontaneous emission rate
//! `Γ`, times in `1/Γ`, positions in units of the sample length `L`.

pub mod analytic;
pub mod bloch;
mod error;
pub mod model;
pub mod par;
pub mod polariton;
pub mod propagator;
pub mod shell;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
