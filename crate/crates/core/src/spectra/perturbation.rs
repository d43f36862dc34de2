use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{self, BareLabel, HilbertSpace, Slot};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::model::{self, CouplingKind, ModelParams};

/// Intermediates closer than this to the initial energy are excluded from
/// the second-order sum.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Closed-form two-path effective coupling between |0,1,g⟩ and |0,0,e⟩
/// in the two-photon model:
///
/// ```text
/// V_eff = κλ / (ωm − 2ωc + 4κ²/ωm) + κλ / (−ωq − 2ωc + 4κ²/ωm)
/// ```
///
/// The first path runs through |2,0₂,g⟩, the second through |2,1₂,e⟩.
/// Ω_eff = −V_eff.
pub fn perturbative_coupling(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.coupling_kind != CouplingKind::TwoPhoton {
        return Err(Error::Unsupported(
            "closed-form effective coupling is derived for two-photon coupling".into(),
        ));
    }
    let shift = 4.0 * params.kappa * params.kappa / params.omega_m;
    let through_pair = params.omega_m - 2.0 * params.omega_c + shift;
    let through_excited = -params.omega_q - 2.0 * params.omega_c + shift;
    for (name, d) in [("|2,0,g>", through_pair), ("|2,1,e>", through_excited)] {
        if d.abs() < DEGENERACY_TOL {
            return Err(Error::Degeneracy(format!(
                "intermediate {name} is degenerate with the initial state (denominator {d:e})"
            )));
        }
    }
    let kl = params.kappa * params.lambda;
    Ok(kl / through_pair + kl / through_excited)
}

/// Numerically exact eigenbasis of H0, labelled by |n, k_n, q⟩.
///
/// H0 is block diagonal in (n, q); each phonon block
/// ωm b†b + nκ(b + b†) is diagonalized on the truncated phonon space, so
/// Franck–Condon overlaps are exact for the truncation.
#[derive(Debug, Clone)]
pub struct H0Basis {
    pub labels: Vec<BareLabel>,
    pub energies: Vec<f64>,
    /// Columns are the eigenvectors, in `labels` order.
    pub vectors: CMatrix,
}

impl H0Basis {
    pub fn new(params: &ModelParams, space: &HilbertSpace) -> Result<Self> {
        params.validate()?;
        let nm = space.factor_dim(Slot::Mechanics);
        let b = fockspace::annihilation(nm)?;
        let n_phonon = b.adjoint().mul(&b).into_matrix();
        let x_m = model::BareOperators::quadrature(&b).into_matrix();
        let dim = space.dim_total();
        let mut vectors = CMatrix::zeros(dim, dim);
        let mut energies = vec![0.0; dim];
        let labels: Vec<BareLabel> = space.labels().collect();
        for n in 0..=space.n_photon_max() {
            let block = &n_phonon * C64::new(params.omega_m, 0.0)
                + &x_m * C64::new(n as f64 * params.kappa, 0.0);
            let (phonon_energies, phonon_vectors) = linalg::hermitian_eigen(&block);
            let displaced = fockspace::displacement(n as f64 * params.beta(), nm)?;
            for k in 0..nm {
                let mut chi = phonon_vectors.column(k).into_owned();
                // align the sign with the displaced Fock state D(nβ)|k⟩
                if chi.dotc(&displaced.matrix().column(k).into_owned()).re < 0.0 {
                    chi.neg_mut();
                }
                for q in [fockspace::AtomState::G, fockspace::AtomState::E] {
                    let label = BareLabel::new(n, k, q);
                    let col = fockspace::basis_index(&label, space)?;
                    let photon = linalg::basis_vector(space.factor_dim(Slot::Cavity), n);
                    let atom = linalg::basis_vector(2, q.index());
                    vectors.set_column(col, &fockspace::product_state(&photon, &chi, &atom));
                    energies[col] = n as f64 * params.omega_c
                        + phonon_energies[k]
                        + q.sigma_z() * params.omega_q / 2.0;
                }
            }
        }
        Ok(H0Basis {
            labels,
            energies,
            vectors,
        })
    }

    pub fn index_of(&self, label: &BareLabel, space: &HilbertSpace) -> Result<usize> {
        fockspace::basis_index(label, space)
    }

    pub fn vector(&self, index: usize) -> CVector {
        self.vectors.column(index).into_owned()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Excluded {
    pub label: BareLabel,
    pub denominator: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderResult {
    /// Σ_l V_Fl V_lI / (E_I − E_l).
    pub value: f64,
    /// Per-intermediate terms, largest magnitude first (zero terms omitted).
    pub contributions: Vec<(BareLabel, f64)>,
    /// Intermediates dropped because they are degenerate with |I⟩.
    pub excluded: Vec<Excluded>,
}

/// Second-order effective coupling between two H0 eigenstates, summed over
/// every other H0 eigenstate.
pub fn generic_second_order(
    params: &ModelParams,
    space: &HilbertSpace,
    initial: BareLabel,
    target: BareLabel,
) -> Result<SecondOrderResult> {
    second_order_sum(params, space, initial, target, None)
}

/// As [`generic_second_order`], restricted to the given intermediates.
pub fn second_order_through(
    params: &ModelParams,
    space: &HilbertSpace,
    initial: BareLabel,
    target: BareLabel,
    intermediates: &[BareLabel],
) -> Result<SecondOrderResult> {
    second_order_sum(params, space, initial, target, Some(intermediates))
}

fn second_order_sum(
    params: &ModelParams,
    space: &HilbertSpace,
    initial: BareLabel,
    target: BareLabel,
    only: Option<&[BareLabel]>,
) -> Result<SecondOrderResult> {
    if initial == target {
        return Err(Error::InvalidLabel(format!(
            "initial and final states coincide ({initial})"
        )));
    }
    for label in [&initial, &target] {
        fockspace::basis_index(label, space)?;
    }
    if let Some(list) = only {
        for label in list {
            fockspace::basis_index(label, space)?;
        }
    }
    let basis = H0Basis::new(params, space)?;
    let v = model::build_v(params, space)?;
    let i_idx = basis.index_of(&initial, space)?;
    let f_idx = basis.index_of(&target, space)?;
    let e_initial = basis.energies[i_idx];
    let v_on_initial = v.apply(&basis.vector(i_idx));
    let v_on_final = v.apply(&basis.vector(f_idx));

    let mut total = C64::new(0.0, 0.0);
    let mut contributions = Vec::new();
    let mut excluded = Vec::new();
    for (l, label) in basis.labels.iter().enumerate() {
        if l == i_idx || l == f_idx {
            continue;
        }
        if let Some(list) = only {
            if !list.contains(label) {
                continue;
            }
        }
        let psi = basis.vectors.column(l);
        let v_li = psi.dotc(&v_on_initial);
        let v_fl = psi.dotc(&v_on_final).conj();
        let numerator = v_fl * v_li;
        if numerator.norm() == 0.0 {
            continue;
        }
        let denominator = e_initial - basis.energies[l];
        if denominator.abs() < DEGENERACY_TOL {
            log::warn!("excluding degenerate intermediate {label} (denominator {denominator:e})");
            excluded.push(Excluded {
                label: *label,
                denominator,
            });
            continue;
        }
        let term = numerator / denominator;
        total += term;
        contributions.push((*label, term.re));
    }
    if total.im.abs() > 1e-12 * total.re.abs().max(1e-300) && total.im.abs() > 1e-15 {
        return Err(Error::NumericalHealth(format!(
            "second-order sum has imaginary part {:e}",
            total.im
        )));
    }
    contributions.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    Ok(SecondOrderResult {
        value: total.re,
        contributions,
        excluded,
    })
}
