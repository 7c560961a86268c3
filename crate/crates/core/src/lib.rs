//! Tripartite quantum Rabi model toolkit.
//!
//! Two spins share one bosonic mode through a spin-spin-boson coupling,
//!
//! ```text
//! H = ω a†a + Ω(σ1x + σ2x) + ε(σ1z + σ2z) + g (a† + a) σ1z σ2z
//! ```
//!
//! The crate computes the spectrum of `H` by truncated exact diagonalization
//! ([`spectra`]) and independently as the zeros of an analytic G-function built
//! from displaced-oscillator recursions ([`gfunction`]). On top of that it
//! provides mean-field analysis ([`meanfield`]), phonon-state tomography
//! ([`phonon`]) and the mapping from trapped-ion parameters to model couplings
//! ([`physparams`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gfunction;
pub mod matrix;
pub mod meanfield;
pub mod model;
pub mod phonon;
pub mod physparams;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
pub use matrix::RealSymmetricMatrix;
pub use model::{FockTruncation, Frame, ModelParams, Sector};
pub use spectra::{EigenSystem, PhononDensityMatrix};
