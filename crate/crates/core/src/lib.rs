//! Vacuum-mediated coupling between a mechanical oscillator and an atom.
//!
//! The crate models a (one- or two-photon) Rabi model whose cavity has one
//! mirror attached to a mechanical oscillator. It provides:
//!
//! * [`fockspace`]: truncated ladder operators, tensor embeddings and
//!   displacement operators on the photon ⊗ phonon ⊗ atom space,
//! * [`model`]: the system Hamiltonians, the analytic optomechanical
//!   spectrum and the Gaussian drive envelope,
//! * [`spectra`]: diagonalization, level sweeps with branch tracking,
//!   anticrossing location and second-order effective couplings,
//! * [`dynamics`]: dressed positive/negative-frequency operators and the
//!   dressed-operator master equation with an adaptive integrator,
//! * [`scenarios`]: config-driven reproduction runs behind the `vrsim` CLI.
//!
//! Energies are in units of the cavity frequency and times in its inverse.

pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod model;
pub mod scenarios;
pub mod spectra;

pub use error::{Error, Result};
pub use fockspace::{AtomState, BareLabel, HilbertSpace, Operator, Slot};
pub use model::{CouplingKind, DriveParams, ModelParams};
