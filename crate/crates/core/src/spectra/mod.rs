//! Spectra of the full Hamiltonian: diagonalization with bare-state labels,
//! level sweeps, anticrossing location and second-order effective
//! couplings.

mod eigen;
mod perturbation;
mod splitting;
mod sweep;

pub use eigen::{diagonalize, EigenSystem, StateLabel, HERMITIAN_TOL, TIE_MARGIN};
pub use perturbation::{
    generic_second_order, perturbative_coupling, second_order_through, Excluded, H0Basis,
    SecondOrderResult, DEGENERACY_TOL,
};
pub use splitting::{
    find_min_splitting, find_min_splitting_for, tracked_gap, SplittingResult, OMEGA_Q_TOL,
};
pub use sweep::{linspace, sweep_levels, ContinuityWarning, LevelTable, CONTINUITY_THRESHOLD};
