//! Two-mode x-p symmetric Gaussian states under simultaneous amplitude
//! damping (with thermal noise) and phase damping.
//!
//! Phase damping destroys Gaussianity, but the damped state stays block
//! diagonal in photon-number sectors, and so does its partial
//! transpose. This crate computes those blocks exactly:
//!
//! - [`params`]: the closed-form envelope evolution and the derived
//!   spectral coefficients.
//! - [`chi`]: the characteristic function, by an exact phase-harmonic
//!   series and independently by Gauss-Hermite quadrature.
//! - [`ppt`]: transpose sector spectra, negativity, logarithmic
//!   negativity, and a first-order perturbation along the dephasing
//!   axis.
//! - [`density`]: state sector spectra, von Neumann entropy, and
//!   coherent information.
//! - [`separability`]: the three analytic criteria, region
//!   classification, crossing times, and the P-representation
//!   analysis.
//! - [`prover`]: exact integer Laurent-polynomial verification of the
//!   minor structure at the transpose boundary.
//! - [`fock`]: an independent truncated Fock-basis master-equation
//!   integrator used as ground truth in the cross-validation tests.
//!
//! The analytic layer and the Fock oracle deliberately share no
//! numerical machinery; their agreement is checked in the integration
//! tests rather than assumed.
//!
//! With the default `parallel` feature the sector towers, parameter
//! grids, and prover minors fan out over a work-stealing pool;
//! disabling it swaps in sequential loops with identical results.

#![forbid(unsafe_code)]

pub mod chi;
pub mod density;
pub mod error;
pub mod fock;
pub mod params;
pub mod ppt;
pub mod prover;
pub mod separability;

mod eig;
mod mathutil;
mod par;

pub use error::{Error, Result};

/// True when this build fans work out over threads.
pub const fn parallel_enabled() -> bool {
    par::is_parallel()
}
