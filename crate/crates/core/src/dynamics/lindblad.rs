use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, SplitMatrix, C64, I};
use crate::model::{drive_envelope, DriveParams};

use super::dressed::DressedOperatorSet;

/// Zero-temperature damping rates (units of ωc).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LindbladConfig {
    /// Cavity damping.
    pub gamma_a: f64,
    /// Mechanical damping.
    pub gamma_m: f64,
    /// Atomic damping.
    pub gamma_q: f64,
}

impl LindbladConfig {
    pub fn ideal() -> Self {
        LindbladConfig::default()
    }

    pub fn uniform(gamma: f64) -> Self {
        LindbladConfig {
            gamma_a: gamma,
            gamma_m: gamma,
            gamma_q: gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("gamma_a", self.gamma_a),
            ("gamma_m", self.gamma_m),
            ("gamma_q", self.gamma_q),
        ] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be non-negative, got {g}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.gamma_a == 0.0 && self.gamma_m == 0.0 && self.gamma_q == 0.0
    }

    /// (rate, jump operator) pairs; the jump operators are the dressed
    /// lowering parts A⁺, B⁺, C⁺.
    fn channels<'a>(&self, dressed: &'a DressedOperatorSet) -> [(f64, &'a CMatrix); 3] {
        [
            (self.gamma_a, &dressed.a_plus),
            (self.gamma_m, &dressed.b_plus),
            (self.gamma_q, &dressed.c_plus),
        ]
    }
}

/// 𝒟[L]ρ = LρL† − ½(L†Lρ + ρL†L).
pub fn dissipator(l: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ld = l.adjoint();
    let ldl = linalg::matmul(&ld, l);
    linalg::matmul(&linalg::matmul(l, rho), &ld)
        - (linalg::matmul(&ldl, rho) + linalg::matmul(rho, &ldl)) * C64::new(0.5, 0.0)
}

/// Drive Hamiltonian F(t)(e^{iωd t} B⁺ + e^{−iωd t} B⁻).
pub fn drive_hamiltonian(t: f64, drive: &DriveParams, dressed: &DressedOperatorSet) -> CMatrix {
    let f = drive_envelope(t, drive);
    let phase = C64::from_polar(1.0, drive.omega_d * t);
    (&dressed.b_plus * phase + &dressed.b_minus * phase.conj()) * C64::new(f, 0.0)
}

/// Right-hand side of the dressed-operator master equation,
///
/// ```text
/// ρ̇ = −i[H + H_d(t), ρ] + γa 𝒟[A⁺]ρ + γm 𝒟[B⁺]ρ + γq 𝒟[C⁺]ρ
/// ```
///
/// evaluated literally with full matrix products. `h`, `rho` and the
/// dressed operators must share a basis (normally the energy eigenbasis).
pub fn lindblad_rhs(
    rho: &CMatrix,
    t: f64,
    h: &CMatrix,
    dressed: &DressedOperatorSet,
    config: &LindbladConfig,
    drive: Option<&DriveParams>,
) -> CMatrix {
    let mut total_h = h.clone();
    if let Some(d) = drive {
        total_h += drive_hamiltonian(t, d, dressed);
    }
    let mut out = linalg::commutator(&total_h, rho) * (-I);
    for (gamma, l) in config.channels(dressed) {
        if gamma > 0.0 {
            out += dissipator(l, rho) * C64::new(gamma, 0.0);
        }
    }
    out
}

/// The master equation specialised to the energy eigenbasis, where the
/// undriven Hamiltonian is diagonal. Integration runs in the interaction
/// picture of that diagonal part, so free evolution costs nothing and only
/// dissipation and drive are integrated.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    dressed: DressedOperatorSet,
    /// Energies relative to the lowest kept state.
    energies: DVector<f64>,
    config: LindbladConfig,
    drive: Option<DriveParams>,
    jumps: Vec<(f64, SplitMatrix, SplitMatrix)>,
    /// ½ Σ γ L†L.
    decay: CMatrix,
    b_plus: CMatrix,
    b_minus: CMatrix,
}

impl MasterEquation {
    pub fn new(
        dressed: DressedOperatorSet,
        config: LindbladConfig,
        drive: Option<DriveParams>,
    ) -> Result<Self> {
        config.validate()?;
        if let Some(d) = &drive {
            d.validate()?;
        }
        let m = dressed.dim();
        let mut jumps = Vec::new();
        let mut decay = CMatrix::zeros(m, m);
        for (gamma, l) in config.channels(&dressed) {
            if gamma > 0.0 {
                let ld = l.adjoint();
                decay += linalg::matmul(&ld, l) * C64::new(0.5 * gamma, 0.0);
                jumps.push((gamma, SplitMatrix::new(l), SplitMatrix::new(&ld)));
            }
        }
        Ok(MasterEquation {
            energies: dressed.relative_energies(),
            b_plus: dressed.b_plus.clone(),
            b_minus: dressed.b_minus.clone(),
            dressed,
            config,
            drive,
            jumps,
            decay,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn dressed(&self) -> &DressedOperatorSet {
        &self.dressed
    }

    pub fn config(&self) -> &LindbladConfig {
        &self.config
    }

    pub fn drive(&self) -> Option<&DriveParams> {
        self.drive.as_ref()
    }

    /// Whether the interaction-picture generator vanishes identically.
    pub fn is_free(&self) -> bool {
        self.jumps.is_empty()
            && self
                .drive
                .as_ref()
                .map_or(true, |d| d.amplitude == 0.0)
    }

    /// Lab-frame (Schrödinger picture) right-hand side in the eigenbasis.
    pub fn rhs(&self, rho: &CMatrix, t: f64) -> CMatrix {
        let m = self.dim();
        let mut out = self.non_hamiltonian(rho, t);
        for k in 0..m {
            for j in 0..m {
                let w = self.energies[j] - self.energies[k];
                out[(j, k)] += -I * w * rho[(j, k)];
            }
        }
        out
    }

    /// Right-hand side for ρ̃ = e^{iEt} ρ e^{−iEt}.
    pub fn interaction_rhs(&self, rho_tilde: &CMatrix, t: f64) -> CMatrix {
        let phases = self.phases(t);
        let rho = rotate(rho_tilde, &phases, false);
        rotate(&self.non_hamiltonian(&rho, t), &phases, true)
    }

    /// e^{iE_j t} for each kept state.
    pub fn phases(&self, t: f64) -> Vec<C64> {
        self.energies
            .iter()
            .map(|&e| C64::from_polar(1.0, e * t))
            .collect()
    }

    /// Lab-frame ρ from the interaction-picture state.
    pub fn to_lab(&self, rho_tilde: &CMatrix, t: f64) -> CMatrix {
        rotate(rho_tilde, &self.phases(t), false)
    }

    /// Interaction-picture state from the lab-frame ρ.
    pub fn to_interaction(&self, rho: &CMatrix, t: f64) -> CMatrix {
        rotate(rho, &self.phases(t), true)
    }

    /// Dissipators plus the drive commutator, assuming Hermitian ρ:
    /// with G = ½Σγ L†L + iH_d the sum is −Gρ − (Gρ)† + Σγ LρL†.
    fn non_hamiltonian(&self, rho: &CMatrix, t: f64) -> CMatrix {
        let m = self.dim();
        let mut g = self.decay.clone();
        let mut driven = false;
        if let Some(d) = &self.drive {
            let f = drive_envelope(t, d);
            if f != 0.0 {
                let phase = C64::from_polar(f, d.omega_d * t);
                g += (&self.b_plus * phase + &self.b_minus * phase.conj()) * I;
                driven = true;
            }
        }
        if self.jumps.is_empty() && !driven {
            return CMatrix::zeros(m, m);
        }
        let rho_split = SplitMatrix::new(rho);
        let g_rho = SplitMatrix::new(&g).left_mul(&rho_split);
        let mut out = -(&g_rho) - g_rho.adjoint();
        for (gamma, l, ld) in &self.jumps {
            let l_rho = SplitMatrix::new(&l.left_mul(&rho_split));
            out += l_rho.left_mul(ld) * C64::new(*gamma, 0.0);
        }
        out
    }
}

/// Multiplies entry (j, k) by p_j p_k* (or its conjugate when `forward`).
fn rotate(x: &CMatrix, phases: &[C64], forward: bool) -> CMatrix {
    let m = x.nrows();
    CMatrix::from_fn(m, m, |j, k| {
        let p = phases[j] * phases[k].conj();
        x[(j, k)] * if forward { p } else { p.conj() }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::HilbertSpace;
    use crate::linalg::max_abs;
    use crate::model::{build_h, ModelParams};
    use crate::spectra::diagonalize;

    fn dressed(n_states: usize) -> DressedOperatorSet {
        let space = HilbertSpace::new(6, 4).unwrap();
        let p = ModelParams::two_photon_default();
        let h = build_h(&p, &space).unwrap();
        let eig = diagonalize(&h, &p, &space).unwrap();
        DressedOperatorSet::new(&eig, &space)
            .unwrap()
            .truncated(n_states)
    }

    fn random_density(m: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = CMatrix::from_fn(m, m, |_, _| C64::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = linalg::trace(&rho);
        rho / tr
    }

    fn drive() -> DriveParams {
        DriveParams {
            amplitude: std::f64::consts::PI,
            omega_d: 1.05,
            sigma_pulse: 5.0,
            t0: 10.0,
        }
    }

    #[test]
    fn unitary_rhs_is_traceless_commutator() {
        let d = dressed(20);
        let rho = random_density(20, 7);
        let out = lindblad_rhs(&rho, 0.0, &d.hamiltonian(), &d, &LindbladConfig::ideal(), None);
        assert!(linalg::trace(&out).norm() < 1e-12);
        let expected = linalg::commutator(&d.hamiltonian(), &rho) * (-I);
        assert!(max_abs(&(out - expected)) < 1e-14);
    }

    #[test]
    fn dressed_ground_state_is_stationary() {
        let d = dressed(30);
        let mut rho = CMatrix::zeros(30, 30);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let config = LindbladConfig {
            gamma_a: 1e-2,
            gamma_m: 3e-3,
            gamma_q: 5e-4,
        };
        let out = lindblad_rhs(&rho, 0.0, &d.hamiltonian(), &d, &config, None);
        assert!(max_abs(&out) < 1e-10);
        let eq = MasterEquation::new(d, config, None).unwrap();
        assert!(max_abs(&eq.rhs(&rho, 3.0)) < 1e-10);
    }

    #[test]
    fn trace_preserved_for_random_states() {
        let d = dressed(25);
        let config = LindbladConfig::uniform(1e-2);
        for seed in 1..5 {
            let rho = random_density(25, seed);
            let out = lindblad_rhs(&rho, 11.0, &d.hamiltonian(), &d, &config, Some(&drive()));
            assert!(linalg::trace(&out).norm() < 1e-10);
            assert!(linalg::hermiticity_deviation(&out) < 1e-10);
        }
    }

    #[test]
    fn optimized_rhs_matches_reference() {
        let d = dressed(25);
        let config = LindbladConfig {
            gamma_a: 1e-2,
            gamma_m: 2e-3,
            gamma_q: 4e-3,
        };
        let rho = random_density(25, 42);
        let t = 9.3;
        let reference = lindblad_rhs(&rho, t, &d.hamiltonian(), &d, &config, Some(&drive()));
        let eq = MasterEquation::new(d, config, Some(drive())).unwrap();
        assert!(max_abs(&(eq.rhs(&rho, t) - &reference)) < 1e-12);

        // interaction picture: d/dt (U†ρU) = U† (L_rest ρ) U
        let rho_tilde = eq.to_interaction(&rho, t);
        let via_interaction = eq.interaction_rhs(&rho_tilde, t);
        let h = eq.dressed().hamiltonian();
        let rest = reference - linalg::commutator(&h, &rho) * (-I);
        assert!(max_abs(&(via_interaction - eq.to_interaction(&rest, t))) < 1e-12);
    }

    #[test]
    fn free_evolution_has_zero_interaction_rhs() {
        let d = dressed(10);
        let eq = MasterEquation::new(d, LindbladConfig::ideal(), None).unwrap();
        assert!(eq.is_free());
        let rho = random_density(10, 3);
        assert_eq!(max_abs(&eq.interaction_rhs(&rho, 5.0)), 0.0);
    }

    #[test]
    fn rejects_negative_rates() {
        let d = dressed(10);
        let bad = LindbladConfig {
            gamma_a: -1.0,
            ..LindbladConfig::ideal()
        };
        assert!(MasterEquation::new(d, bad, None).is_err());
    }
}
