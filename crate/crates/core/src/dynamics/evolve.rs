use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{BareLabel, HilbertSpace};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::model::{self, DriveParams, ModelParams};
use crate::spectra::{self, find_min_splitting};

use super::dressed::DressedOperatorSet;
use super::integrator::{Dopri5, StepStats, Tolerances};
use super::lindblad::{LindbladConfig, MasterEquation};

/// Imaginary parts of expectation values above this are an error.
pub const IMAG_ERROR_TOL: f64 = 1e-6;

/// Expectation values of the dressed number operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    /// ⟨C⁻C⁺⟩
    pub exp_atom: f64,
    /// ⟨A⁻A⁺⟩
    pub exp_photon: f64,
    /// ⟨B⁻B⁺⟩
    pub exp_phonon: f64,
    /// ⟨C⁻A⁻A⁺C⁺⟩
    pub g2_qp: f64,
    /// Largest discarded imaginary part.
    pub imag_residue: f64,
}

/// The four observable operators, precomputed for repeated use.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    atom: CMatrix,
    photon: CMatrix,
    phonon: CMatrix,
    g2: CMatrix,
}

impl ObservableSet {
    pub fn new(dressed: &DressedOperatorSet) -> Self {
        let atom = linalg::matmul(&dressed.c_minus, &dressed.c_plus);
        let photon = linalg::matmul(&dressed.a_minus, &dressed.a_plus);
        let phonon = linalg::matmul(&dressed.b_minus, &dressed.b_plus);
        let g2 = linalg::matmul(
            &dressed.c_minus,
            &linalg::matmul(&photon, &dressed.c_plus),
        );
        ObservableSet {
            atom,
            photon,
            phonon,
            g2,
        }
    }

    pub fn evaluate(&self, rho: &CMatrix) -> Result<Observables> {
        let vals = [
            linalg::trace_product(&self.atom, rho),
            linalg::trace_product(&self.photon, rho),
            linalg::trace_product(&self.phonon, rho),
            linalg::trace_product(&self.g2, rho),
        ];
        let imag_residue = vals.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
        if imag_residue > IMAG_ERROR_TOL {
            return Err(Error::NumericalHealth(format!(
                "expectation value has imaginary part {imag_residue:e}"
            )));
        }
        Ok(Observables {
            exp_atom: vals[0].re,
            exp_photon: vals[1].re,
            exp_phonon: vals[2].re,
            g2_qp: vals[3].re,
            imag_residue,
        })
    }
}

/// ⟨A⁻A⁺⟩, ⟨B⁻B⁺⟩, ⟨C⁻C⁺⟩ and ⟨C⁻A⁻A⁺C⁺⟩ for ρ given in the eigenbasis of
/// `dressed`.
pub fn observables(rho: &CMatrix, dressed: &DressedOperatorSet) -> Result<Observables> {
    if rho.nrows() != dressed.dim() || rho.ncols() != dressed.dim() {
        return Err(Error::InvalidDimension(format!(
            "density matrix is {}x{}, dressed operators are {}-dimensional",
            rho.nrows(),
            rho.ncols(),
            dressed.dim()
        )));
    }
    ObservableSet::new(dressed).evaluate(rho)
}

/// Sampled observables and health diagnostics of one run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    /// Ω_eff used for the scaled time axis (0 if none was given).
    pub omega_eff: f64,
    pub exp_atom: Vec<f64>,
    pub exp_photon: Vec<f64>,
    pub exp_phonon: Vec<f64>,
    pub g2_qp: Vec<f64>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
    /// Lowest eigenvalue of ρ at each sample.
    pub min_eigenvalue: Vec<f64>,
    /// ‖ρ − ρ†‖_max before re-Hermitization, per sample.
    pub hermiticity_error: Vec<f64>,
    pub max_imag_residue: f64,
    /// Weight of the initial state inside the kept eigenstates.
    pub retained_weight: f64,
    pub n_states: usize,
    pub stats: StepStats,
}

pub const CSV_HEADER: [&str; 8] = [
    "t",
    "omega_eff_t",
    "exp_atom",
    "exp_photon",
    "exp_phonon",
    "g2_qp",
    "trace",
    "purity",
];

/// 12 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn omega_eff_t(&self) -> Vec<f64> {
        self.times.iter().map(|t| t * self.omega_eff).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.trace.iter().fold(0.0, |m, t| m.max((t - 1.0).abs()))
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.hermiticity_error.iter().fold(0.0, |m, &x| m.max(x))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// Linear interpolation of a sampled column at time `t`.
    pub fn interpolate(column: &[f64], times: &[f64], t: f64) -> Option<f64> {
        let i = times.iter().position(|&s| s >= t)?;
        if i == 0 || times[i] == t {
            return Some(column[i]);
        }
        let (t0, t1) = (times[i - 1], times[i]);
        let w = (t - t0) / (t1 - t0);
        Some(column[i - 1] * (1.0 - w) + column[i] * w)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.times[i] * self.omega_eff,
                self.exp_atom[i],
                self.exp_photon[i],
                self.exp_phonon[i],
                self.g2_qp[i],
                self.trace[i],
                self.purity[i],
            ];
            w.write_record(row.iter().map(|&x| fmt(x)))?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Integration settings for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    /// Ω_eff for the scaled time column.
    pub omega_eff: f64,
    /// Skip the per-sample eigen-decomposition of ρ.
    pub skip_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tolerances: Tolerances::default(),
            omega_eff: 0.0,
            skip_positivity: false,
        }
    }
}

fn check_density(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidDimension("density matrix must be square".into()));
    }
    let herm = linalg::hermiticity_deviation(rho);
    if herm > 1e-8 {
        return Err(Error::Precondition(format!(
            "initial density matrix is not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = linalg::trace(rho);
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "initial density matrix has trace {tr}"
        )));
    }
    Ok(())
}

fn hermitize(rho: &CMatrix) -> CMatrix {
    (rho + rho.adjoint()) * C64::new(0.5, 0.0)
}

fn min_eigenvalue(rho: &CMatrix) -> f64 {
    let (values, _) = linalg::hermitian_eigen(rho);
    values.iter().fold(f64::INFINITY, |m, &x| m.min(x))
}

/// Integrates the dressed-operator master equation from `initial` (given in
/// the eigenbasis of `dressed`) and samples observables at `times`.
///
/// Times must be non-decreasing and start at or after 0, which is taken as
/// the time of `initial`.
pub fn evolve(
    initial: &CMatrix,
    times: &[f64],
    dressed: &DressedOperatorSet,
    config: &LindbladConfig,
    drive: Option<&DriveParams>,
    options: &EvolveOptions,
) -> Result<TimeSeries> {
    check_density(initial)?;
    if initial.nrows() != dressed.dim() {
        return Err(Error::InvalidDimension(format!(
            "initial state is {}-dimensional, dressed operators are {}-dimensional",
            initial.nrows(),
            dressed.dim()
        )));
    }
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams(
            "sample times must be non-empty, non-negative and non-decreasing".into(),
        ));
    }
    let eq = MasterEquation::new(dressed.clone(), *config, drive.copied())?;
    let obs = ObservableSet::new(dressed);
    let mut series = TimeSeries {
        omega_eff: options.omega_eff,
        retained_weight: 1.0,
        n_states: dressed.dim(),
        ..TimeSeries::default()
    };

    let free = eq.is_free();
    let mut solver = Dopri5::new(
        |t, y: &CMatrix| eq.interaction_rhs(y, t),
        0.0,
        initial.clone(),
        options.tolerances,
    );
    for &t in times {
        if !free {
            solver.advance(t)?;
        }
        let rho_tilde = solver.state();
        let herm_err = linalg::hermiticity_deviation(rho_tilde);
        let rho_tilde = hermitize(rho_tilde);
        let rho = eq.to_lab(&rho_tilde, t);
        let o = obs.evaluate(&rho)?;
        series.times.push(t);
        series.exp_atom.push(o.exp_atom);
        series.exp_photon.push(o.exp_photon);
        series.exp_phonon.push(o.exp_phonon);
        series.g2_qp.push(o.g2_qp);
        series.trace.push(linalg::trace(&rho).re);
        series.purity.push(linalg::trace_product(&rho, &rho).re);
        series.hermiticity_error.push(herm_err);
        series.min_eigenvalue.push(if options.skip_positivity {
            f64::NAN
        } else {
            min_eigenvalue(&rho)
        });
        series.max_imag_residue = series.max_imag_residue.max(o.imag_residue);
        if !free && herm_err > 0.0 {
            solver.set_state(rho_tilde);
        }
    }
    series.stats = solver.stats();
    Ok(series)
}

/// Projects a pure state (bare basis) onto the kept eigenstates and
/// renormalizes. Returns ρ in the eigenbasis and the retained weight.
pub fn project_pure_state(psi: &CVector, dressed: &DressedOperatorSet) -> Result<(CMatrix, f64)> {
    if psi.len() != dressed.vectors.nrows() {
        return Err(Error::InvalidDimension(format!(
            "state has length {}, expected {}",
            psi.len(),
            dressed.vectors.nrows()
        )));
    }
    let c = dressed.vectors.adjoint() * psi;
    let weight = c.norm_squared();
    if weight < 1e-12 {
        return Err(Error::Precondition(
            "state has no weight on the kept eigenstates".into(),
        ));
    }
    let c = c / C64::new(weight.sqrt(), 0.0);
    Ok((&c * c.adjoint(), weight))
}

/// ρ = |label⟩⟨label| for a bare product state, in the eigenbasis.
pub fn bare_initial_state(
    label: &BareLabel,
    space: &HilbertSpace,
    dressed: &DressedOperatorSet,
) -> Result<(CMatrix, f64)> {
    let psi = crate::fockspace::bare_state(label, space)?;
    project_pure_state(&psi, dressed)
}

/// ρ = |ψ_0⟩⟨ψ_0|.
pub fn ground_initial_state(dressed: &DressedOperatorSet) -> CMatrix {
    let m = dressed.dim();
    let mut rho = CMatrix::zeros(m, m);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    rho
}

/// Everything needed to run dynamics for one parameter set.
#[derive(Debug, Clone)]
pub struct DynamicsSetup {
    pub params: ModelParams,
    pub space: HilbertSpace,
    pub dressed: DressedOperatorSet,
    /// Eigenstates of the full truncated space.
    pub total_states: usize,
}

/// Diagonalizes H and builds dressed operators on the `n_states` lowest
/// eigenstates (all of them if `None`).
pub fn prepare(
    params: &ModelParams,
    space: &HilbertSpace,
    n_states: Option<usize>,
) -> Result<DynamicsSetup> {
    let h = model::build_h(params, space)?;
    let eig = spectra::diagonalize(&h, params, space)?;
    let total = eig.dim();
    let dressed = DressedOperatorSet::new(&eig, space)?;
    let dressed = match n_states {
        Some(m) if m < total => {
            if m < 2 {
                return Err(Error::InvalidParams("need at least two kept states".into()));
            }
            dressed.truncated(m)
        }
        _ => dressed,
    };
    Ok(DynamicsSetup {
        params: *params,
        space: *space,
        dressed,
        total_states: total,
    })
}

/// Settings of the driven ground-state protocol.
#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    pub times: Vec<f64>,
    pub n_states: Option<usize>,
    /// Bracket handed to the anticrossing search that supplies Ω_eff.
    pub bracket: (f64, f64),
    pub evolve: EvolveOptions,
}

/// Result of [`run_driven_protocol`].
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub series: TimeSeries,
    pub omega_eff: f64,
}

/// Drives the mechanics with a Gaussian pulse starting from the dressed
/// ground state. Requires ωd = ωm and σ = 1/(10 Ω_eff), with Ω_eff from the
/// anticrossing search.
pub fn run_driven_protocol(
    params: &ModelParams,
    space: &HilbertSpace,
    config: &LindbladConfig,
    drive: &DriveParams,
    options: &ProtocolOptions,
) -> Result<ProtocolRun> {
    drive.validate()?;
    if (drive.omega_d - params.omega_m).abs() > 1e-12 * params.omega_m.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "drive frequency {} must equal omega_m = {}",
            drive.omega_d, params.omega_m
        )));
    }
    let split = find_min_splitting(params, space, options.bracket)?;
    let omega_eff = split.omega_eff();
    let sigma = 1.0 / (10.0 * omega_eff);
    if (drive.sigma_pulse - sigma).abs() > 1e-6 * sigma {
        return Err(Error::Precondition(format!(
            "sigma_pulse {} must equal 1/(10 omega_eff) = {sigma}",
            drive.sigma_pulse
        )));
    }
    let setup = prepare(params, space, options.n_states)?;
    let rho0 = ground_initial_state(&setup.dressed);
    let mut evolve_options = options.evolve;
    evolve_options.omega_eff = omega_eff;
    let series = evolve(
        &rho0,
        &options.times,
        &setup.dressed,
        config,
        Some(drive),
        &evolve_options,
    )?;
    Ok(ProtocolRun { series, omega_eff })
}
