//! Simulator and analysis toolkit for a driven four-level N-type atom.
//!
//! The atom has two stable lower levels |1>, |2> and two decaying upper
//! levels |3>, |4>; three fields drive the |1>-|3>, |2>-|3>, and |1>-|4>
//! transitions. All rates are expressed in units of a reference decay rate
//! gamma and the internal time variable is the dimensionless tau = gamma*t.
//!
//! The crate integrates the rotating-frame density-matrix equations of
//! motion, quantifies atom-photon entanglement through the von-Neumann
//! entropy of the atomic state (the DEM), analyzes populations in the bare
//! and dressed bases, computes steady states both by long-time evolution and
//! by a Liouvillian null-space solve, and evaluates the closed-form
//! steady-state coherence and eigenvalues for comparison with the numerics.

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod output;
pub mod sweep;

pub use error::Error;
pub use model::{DensityMatrix, SystemParams};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense 4x4 complex matrix.
pub type Matrix4c = nalgebra::Matrix4<C64>;
/// Complex 4-vector (pure states, dressed vectors).
pub type Vector4c = nalgebra::Vector4<C64>;

pub type Result<T> = std::result::Result<T, Error>;
