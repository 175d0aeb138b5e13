//! Simulator and verification toolkit for the synchronization master
//! equation over networks of qubits coupled by swapping operators.
//!
//! The crate provides three interchangeable views of the same dynamics:
//!
//! * [`lindblad`] — dense density-operator integration of
//!   `d rho/dt = -(i/hbar)[H, rho] + sum_E (U rho U^dag - rho)`;
//! * [`orbits`] — the equivalent decomposition into autonomous entry orbits
//!   under simultaneous edge transpositions;
//! * [`consensus`] — the classical complex-valued consensus networks each
//!   orbit reduces to.
//!
//! [`analysis`] supplies the asymptotic predictors (decoherence measure,
//! corner phase tracking, Hamming-class diagonal limits) and [`hilbert`] the
//! underlying basis/graph/state bookkeeping.

pub mod analysis;
pub mod consensus;
pub mod error;
mod fingerprint;
pub mod hilbert;
mod integrator;
pub mod lindblad;
pub mod orbits;
pub mod presets;

pub use error::{Error, Result};
pub use hilbert::{
    swap_conjugate_pair, swap_matrix, BasisLabel, DensityMatrix, DensityReport, InteractionGraph,
    Tolerances, MAX_QUBITS,
};
pub use integrator::{auto_step, DEFAULT_STEP_FACTOR, STABILITY_LIMIT};
pub use lindblad::{
    cptp_diagnostics, integrate, master_rhs, stiffness_bound, CptpReport, DiagonalHamiltonian,
    StepParams, Trajectory, TrajectoryMeta,
};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
