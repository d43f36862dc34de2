//! Dressed-operator master equation: operators, right-hand side,
//! integrator and sampled observables.

mod dressed;
mod evolve;
pub mod integrator;
mod lindblad;

pub use dressed::{DressedOperatorSet, DEGENERACY_TOL};
pub use evolve::{
    bare_initial_state, evolve, ground_initial_state, observables, prepare, project_pure_state,
    run_driven_protocol, DynamicsSetup, EvolveOptions, ObservableSet, Observables,
    ProtocolOptions, ProtocolRun, TimeSeries, CSV_HEADER, IMAG_ERROR_TOL,
};
pub use integrator::{StepStats, Tolerances};
pub use lindblad::{dissipator, drive_hamiltonian, lindblad_rhs, LindbladConfig, MasterEquation};
