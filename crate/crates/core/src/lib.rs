//! Frequency-domain stability laboratory for the thermoelastic laminated
//! Timoshenko beam with interfacial slip, under Fourier or Cattaneo heat
//! conduction.
//!
//! After a Fourier transform in `x` the system becomes a family of linear ODEs
//! `U_t = A(xi) U` on `C^7` (Fourier) or `C^8` (Cattaneo). The modules here
//! build `A(xi)`, study its spectrum, propagate solutions exactly, certify the
//! perturbed-energy functionals, and rebuild physical-space Sobolev norms by
//! Plancherel quadrature.

// Validation uses `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    assemble_generator, classify, decay_function, energy_weights, CaseTag, Component, CouplingOrder,
    GeneratorMatrix, HeatLaw, ModelParams, Placement, Regime, StateVector, C64,
};
