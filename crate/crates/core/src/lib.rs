//! Balanced reflection design for a reconfigurable intelligent surface (RIS)
//! shared by two cellular operators.
//!
//! The RIS belongs to cell 1 but reflects cell 2's carrier as well. The
//! design maximizes the total reflective gain of cell 1 while suppressing the
//! uncontrolled gain seen by cell 2, by minimizing `-φᴴ R(λ) φ` over the
//! complex circle manifold with Riemannian conjugate gradients.
//!
//! Module map:
//!
//! * [`manifold`]: circle-manifold geometry and the RCG minimizer.
//! * [`channel`]: planar-array geometry and seeded Rician link generation.
//! * [`ris_design`]: cascaded channels, `R(λ)`, and the three RIS designs.
//! * [`beamform`]: composite channels and SLNR precoding.
//! * [`metrics`]: SINR and sum-rate.
//! * [`sim`]: scenarios, Monte Carlo drops, sweeps, CSV output and the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamform;
pub mod channel;
mod error;
pub mod linalg;
pub mod manifold;
pub mod metrics;
pub mod ris_design;
pub mod sim;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex column vector used throughout the crate.
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
