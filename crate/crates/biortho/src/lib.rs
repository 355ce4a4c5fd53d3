//! Finite-dimensional biorthogonal quantum mechanics.
//!
//! The crate builds biorthogonal frames (paired bases with
//! `<chi_n|phi_m> = delta_nm`), represents physical observables by Hermitian
//! coefficient arrays in such frames, evaluates expectation values and
//! measurement statistics in the physical inner product, evolves closed
//! systems unitarily with respect to that inner product, and simulates an
//! open qubit with balanced gain and loss through a Lindblad master
//! equation. Closed-system statistics come out independent of the frame
//! parameters by construction, and the toolkit exposes the numerical
//! experiments that check this.

pub mod composite;
pub mod dynamics;
pub mod error;
pub mod frame;
pub mod lindblad;
pub mod linalg;
pub mod observable;
pub mod two_level;

pub mod cli;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use num_complex::Complex64;
