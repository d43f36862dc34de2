use nalgebra::DVector;

use crate::error::Result;
use crate::fockspace::HilbertSpace;
use crate::linalg::{self, CMatrix, C64};
use crate::model::BareOperators;
use crate::spectra::EigenSystem;

/// Energy differences below this are treated as degenerate when splitting
/// transitions into positive and negative frequency parts.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Dressed positive/negative-frequency operators in the energy eigenbasis:
///
/// ```text
/// O⁺ = Σ_{j<k} ⟨ψ_j|(o + o†)|ψ_k⟩ |ψ_j⟩⟨ψ_k|,   O⁻ = (O⁺)†
/// ```
///
/// for o = a (A), b (B) and σ− (C). O⁺ lowers the energy; O⁻ raises it.
#[derive(Debug, Clone)]
pub struct DressedOperatorSet {
    pub a_plus: CMatrix,
    pub a_minus: CMatrix,
    pub b_plus: CMatrix,
    pub b_minus: CMatrix,
    pub c_plus: CMatrix,
    pub c_minus: CMatrix,
    /// Eigen-energies the operators refer to.
    pub energies: DVector<f64>,
    /// Eigenvectors (columns, bare basis) of the states kept.
    pub vectors: CMatrix,
    /// Pairs (j, k), j < k, with a nonzero matrix element between
    /// (numerically) degenerate states. They are assigned to O⁺ by index.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl DressedOperatorSet {
    pub fn new(eigen: &EigenSystem, space: &HilbertSpace) -> Result<Self> {
        let ops = BareOperators::new(space)?;
        let v = &eigen.vectors;
        let dim = eigen.dim();
        let mut degenerate = Vec::new();
        let mut split = |o: &crate::fockspace::Operator| -> CMatrix {
            let x = BareOperators::quadrature(o);
            let in_eigenbasis = linalg::matmul(&v.adjoint(), &linalg::matmul(x.matrix(), v));
            let mut plus = CMatrix::zeros(dim, dim);
            for k in 0..dim {
                for j in 0..k {
                    let z = in_eigenbasis[(j, k)];
                    plus[(j, k)] = z;
                    if z.norm() > 1e-14
                        && (eigen.values[k] - eigen.values[j]).abs() < DEGENERACY_TOL
                        && !degenerate.contains(&(j, k))
                    {
                        degenerate.push((j, k));
                    }
                }
            }
            plus
        };
        let a_plus = split(&ops.a);
        let b_plus = split(&ops.b);
        let c_plus = split(&ops.sigma_minus);
        degenerate.sort_unstable();
        if !degenerate.is_empty() {
            log::warn!(
                "{} degenerate transition(s) assigned to positive-frequency parts by index",
                degenerate.len()
            );
        }
        Ok(DressedOperatorSet {
            a_minus: a_plus.adjoint(),
            b_minus: b_plus.adjoint(),
            c_minus: c_plus.adjoint(),
            a_plus,
            b_plus,
            c_plus,
            energies: eigen.values.clone(),
            vectors: eigen.vectors.clone(),
            degenerate_pairs: degenerate,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Restriction to the `n_states` lowest eigenstates.
    ///
    /// Positive-frequency operators only connect a state to lower ones, so
    /// the restricted operators and products like O⁻O⁺ are exact on the
    /// kept block.
    pub fn truncated(&self, n_states: usize) -> DressedOperatorSet {
        let m = n_states.min(self.dim());
        let block = |x: &CMatrix| x.view((0, 0), (m, m)).into_owned();
        DressedOperatorSet {
            a_plus: block(&self.a_plus),
            a_minus: block(&self.a_minus),
            b_plus: block(&self.b_plus),
            b_minus: block(&self.b_minus),
            c_plus: block(&self.c_plus),
            c_minus: block(&self.c_minus),
            energies: self.energies.rows(0, m).into_owned(),
            vectors: self.vectors.columns(0, m).into_owned(),
            degenerate_pairs: self
                .degenerate_pairs
                .iter()
                .copied()
                .filter(|&(_, k)| k < m)
                .collect(),
        }
    }

    /// Rotates an eigenbasis operator to the bare basis, V X V†.
    pub fn to_bare(&self, x: &CMatrix) -> CMatrix {
        linalg::matmul(&self.vectors, &linalg::matmul(x, &self.vectors.adjoint()))
    }

    /// Energies relative to the lowest kept state.
    pub fn relative_energies(&self) -> DVector<f64> {
        let e0 = self.energies[0];
        self.energies.map(|e| e - e0)
    }

    /// Diagonal Hamiltonian in the eigenbasis.
    pub fn hamiltonian(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.energies.map(|e| C64::new(e, 0.0)))
    }
}
