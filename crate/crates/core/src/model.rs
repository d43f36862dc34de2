//! System Hamiltonians, the analytic optomechanical spectrum and the drive
//! envelope.
//!
//! H = H0 + V with
//!
//! ```text
//! H0 = (ωq/2) σz + ωc a†a + ωm b†b + κ a†a (b + b†)
//! V  = ½κ (a² + a†²)(b + b†) + λ (a² + a†²) σx      (two-photon)
//! V  = ½κ (a² + a†²)(b + b†) + λ (a + a†) σx        (one-photon)
//! ```
//!
//! The first term of V is the dynamical Casimir (photon pair) term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{
    self, embed, AtomState, BareLabel, HilbertSpace, Operator, Slot, SpaceTag,
};
use crate::linalg::{CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    TwoPhoton,
    OnePhoton,
}

/// Frequencies and couplings, all in units of the cavity frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_m: f64,
    pub omega_q: f64,
    /// Optomechanical coupling κ.
    pub kappa: f64,
    /// Atom-field coupling λ.
    pub lambda: f64,
    pub coupling_kind: CouplingKind,
}

impl ModelParams {
    /// Two-photon parameter set: ωm = 1.05, κ = λ = 0.05, ωq near the
    /// phonon/atom anticrossing.
    pub fn two_photon_default() -> Self {
        ModelParams {
            omega_c: 1.0,
            omega_m: 1.05,
            omega_q: 1.052,
            kappa: 0.05,
            lambda: 0.05,
            coupling_kind: CouplingKind::TwoPhoton,
        }
    }

    /// One-photon parameter set: ωm = 1.2, κ = λ = 0.08, ωq ≈ ωm − ωc.
    pub fn one_photon_default() -> Self {
        ModelParams {
            omega_c: 1.0,
            omega_m: 1.2,
            omega_q: 0.2,
            kappa: 0.08,
            lambda: 0.08,
            coupling_kind: CouplingKind::OnePhoton,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [
            ("omega_c", self.omega_c),
            ("omega_m", self.omega_m),
            ("omega_q", self.omega_q),
        ];
        for (name, value) in freqs {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        for (name, value) in [("kappa", self.kappa), ("lambda", self.lambda)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Polaron displacement per photon, β = κ/ωm.
    pub fn beta(&self) -> f64 {
        self.kappa / self.omega_m
    }

    pub fn with_omega_q(self, omega_q: f64) -> Self {
        ModelParams { omega_q, ..self }
    }

    pub fn with_couplings(self, kappa: f64, lambda: f64) -> Self {
        ModelParams {
            kappa,
            lambda,
            ..self
        }
    }
}

/// Gaussian pulse driving the mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Pulse area scale Λ.
    pub amplitude: f64,
    pub omega_d: f64,
    /// Standard deviation of the Gaussian, in 1/ωc.
    pub sigma_pulse: f64,
    /// Pulse center, in 1/ωc.
    pub t0: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_pulse.is_finite() && self.sigma_pulse > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma_pulse must be positive, got {}",
                self.sigma_pulse
            )));
        }
        if !(self.amplitude.is_finite() && self.omega_d.is_finite() && self.t0.is_finite()) {
            return Err(Error::InvalidParams("drive parameters must be finite".into()));
        }
        Ok(())
    }
}

/// F(t) = Λ exp(−(t−t0)²/2σ²) / (σ√(2π)).
pub fn drive_envelope(t: f64, drive: &DriveParams) -> f64 {
    let s = drive.sigma_pulse;
    let x = (t - drive.t0) / s;
    drive.amplitude * (-0.5 * x * x).exp() / (s * (2.0 * PI).sqrt())
}

/// The embedded bare operators used to assemble Hamiltonians.
#[derive(Debug, Clone)]
pub struct BareOperators {
    pub space: HilbertSpace,
    pub a: Operator,
    pub b: Operator,
    pub sigma_minus: Operator,
    pub sigma_z: Operator,
    pub sigma_x: Operator,
}

impl BareOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let a = embed(
            &fockspace::annihilation(space.factor_dim(Slot::Cavity))?,
            Slot::Cavity,
            space,
        )?;
        let b = embed(
            &fockspace::annihilation(space.factor_dim(Slot::Mechanics))?,
            Slot::Mechanics,
            space,
        )?;
        Ok(BareOperators {
            space: *space,
            a,
            b,
            sigma_minus: embed(&fockspace::sigma_minus(), Slot::Atom, space)?,
            sigma_z: embed(&fockspace::sigma_z(), Slot::Atom, space)?,
            sigma_x: embed(&fockspace::sigma_x(), Slot::Atom, space)?,
        })
    }

    /// o + o† for a bare operator o.
    pub fn quadrature(o: &Operator) -> Operator {
        o.add(&o.adjoint())
    }

    /// a² + a†².
    pub fn pair_quadrature(&self) -> Operator {
        let a2 = self.a.mul(&self.a);
        a2.add(&a2.adjoint())
    }
}

/// H0 = (ωq/2)σz + ωc a†a + ωm b†b + κ a†a(b + b†).
pub fn build_h0(params: &ModelParams, space: &HilbertSpace) -> Result<Operator> {
    params.validate()?;
    let ops = BareOperators::new(space)?;
    Ok(h0_from(params, &ops))
}

fn h0_from(params: &ModelParams, ops: &BareOperators) -> Operator {
    let n_photon = ops.a.adjoint().mul(&ops.a);
    let n_phonon = ops.b.adjoint().mul(&ops.b);
    let x_m = BareOperators::quadrature(&ops.b);
    ops.sigma_z
        .scale(params.omega_q / 2.0)
        .add(&n_photon.scale(params.omega_c))
        .add(&n_phonon.scale(params.omega_m))
        .add(&n_photon.mul(&x_m).scale(params.kappa))
}

/// Interaction V: pair-creation term plus the one- or two-photon atom-field
/// coupling.
pub fn build_v(params: &ModelParams, space: &HilbertSpace) -> Result<Operator> {
    params.validate()?;
    let ops = BareOperators::new(space)?;
    Ok(v_from(params, &ops))
}

fn v_from(params: &ModelParams, ops: &BareOperators) -> Operator {
    let pairs = ops.pair_quadrature();
    let x_m = BareOperators::quadrature(&ops.b);
    let dce = pairs.mul(&x_m).scale(0.5 * params.kappa);
    let field = match params.coupling_kind {
        CouplingKind::TwoPhoton => pairs,
        CouplingKind::OnePhoton => BareOperators::quadrature(&ops.a),
    };
    dce.add(&field.mul(&ops.sigma_x).scale(params.lambda))
}

/// Full Hamiltonian H = H0 + V.
pub fn build_h(params: &ModelParams, space: &HilbertSpace) -> Result<Operator> {
    params.validate()?;
    let ops = BareOperators::new(space)?;
    Ok(h0_from(params, &ops).add(&v_from(params, &ops)))
}

/// E_{n,k} = nωc − n²β²ωm + kωm, the exact spectrum of the optomechanical
/// part of H0.
pub fn analytic_optomech_energy(n: usize, k: usize, params: &ModelParams) -> f64 {
    let n = n as f64;
    let beta = params.beta();
    n * params.omega_c - n * n * beta * beta * params.omega_m + k as f64 * params.omega_m
}

/// Analytic eigenvalue of H0 for the label, E_{n,k} ± ωq/2.
pub fn analytic_h0_energy(label: &BareLabel, params: &ModelParams) -> f64 {
    analytic_optomech_energy(label.n, label.k, params) + label.q.sigma_z() * params.omega_q / 2.0
}

/// |n⟩ ⊗ D(nβ)|k⟩ ⊗ |q⟩, the eigenvector of H0 with eigenvalue
/// E_{n,k} ± ωq/2 (up to phonon truncation).
pub fn displaced_eigvec(
    label: &BareLabel,
    params: &ModelParams,
    space: &HilbertSpace,
) -> Result<CVector> {
    fockspace::basis_index(label, space)?;
    let phonon_dim = space.factor_dim(Slot::Mechanics);
    let d = fockspace::displacement(label.n as f64 * params.beta(), phonon_dim)?;
    let photon = crate::linalg::basis_vector(space.factor_dim(Slot::Cavity), label.n);
    let phonon = d.matrix().column(label.k).into_owned();
    let atom = crate::linalg::basis_vector(2, label.q.index());
    Ok(fockspace::product_state(&photon, &phonon, &atom))
}

/// Displaced basis for the whole space, one column per label in basis order.
pub fn displaced_basis(params: &ModelParams, space: &HilbertSpace) -> Result<crate::linalg::CMatrix> {
    let dim = space.dim_total();
    let phonon_dim = space.factor_dim(Slot::Mechanics);
    let displacements = (0..=space.n_photon_max())
        .map(|n| fockspace::displacement(n as f64 * params.beta(), phonon_dim))
        .collect::<Result<Vec<_>>>()?;
    let mut basis = crate::linalg::CMatrix::zeros(dim, dim);
    for (col, label) in space.labels().enumerate() {
        let d = displacements[label.n].matrix();
        for kp in 0..phonon_dim {
            let row = fockspace::basis_index(&BareLabel::new(label.n, kp, label.q), space)?;
            basis[(row, col)] = d[(kp, label.k)];
        }
    }
    Ok(basis)
}

/// Optomechanical block ωc a†a + ωm b†b + κ a†a(b + b†) on photon ⊗ phonon,
/// without the atom.
pub fn optomech_block(params: &ModelParams, space: &HilbertSpace) -> Result<Operator> {
    params.validate()?;
    let nc = space.factor_dim(Slot::Cavity);
    let nm = space.factor_dim(Slot::Mechanics);
    let a = fockspace::annihilation(nc)?;
    let b = fockspace::annihilation(nm)?;
    let id_c = crate::linalg::identity(nc);
    let id_m = crate::linalg::identity(nm);
    let n_photon = a.adjoint().mul(&a).into_matrix();
    let n_phonon = b.adjoint().mul(&b).into_matrix();
    let x_m = BareOperators::quadrature(&b).into_matrix();
    let m = n_photon.kronecker(&id_m) * C64::new(params.omega_c, 0.0)
        + id_c.kronecker(&n_phonon) * C64::new(params.omega_m, 0.0)
        + n_photon.kronecker(&x_m) * C64::new(params.kappa, 0.0);
    Operator::new(m, SpaceTag::Factor(nc * nm))
}

/// Convenience: the two labels whose anticrossing the scenarios track.
pub fn resonant_pair(kind: CouplingKind) -> (BareLabel, BareLabel) {
    let phonon = BareLabel::new(0, 1, AtomState::G);
    match kind {
        CouplingKind::TwoPhoton => (phonon, BareLabel::new(0, 0, AtomState::E)),
        CouplingKind::OnePhoton => (phonon, BareLabel::new(1, 0, AtomState::E)),
    }
}
