use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{BareLabel, HilbertSpace, Operator};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::model::{self, ModelParams};

/// Hermiticity tolerance accepted by [`diagonalize`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Two candidate labels whose squared overlaps differ by less than this are
/// treated as a tie.
pub const TIE_MARGIN: f64 = 0.1;

/// Bare-state assignment of one eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateLabel {
    pub label: BareLabel,
    /// Squared overlap with the assigned basis state.
    pub overlap: f64,
    /// Whether the assignment used the displaced (H0 eigen) basis; `false`
    /// means the bare Fock basis was used as a fallback.
    pub displaced: bool,
    /// Runner-up label when the assignment is ambiguous in both bases.
    pub tie: Option<BareLabel>,
}

/// Ascending eigenvalues and matching eigenvectors of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    /// Eigenvectors as columns, in the bare composite basis.
    pub vectors: CMatrix,
    pub labels: Vec<StateLabel>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, index: usize) -> CVector {
        self.vectors.column(index).into_owned()
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    /// Squared overlap |⟨v|ψ_l⟩|² for every eigenstate.
    pub fn weights(&self, v: &CVector) -> Vec<f64> {
        (0..self.dim())
            .map(|l| self.vectors.column(l).dotc(v).norm_sqr())
            .collect()
    }

    /// Index of the eigenstate with the largest overlap onto `v`.
    pub fn best_match(&self, v: &CVector) -> usize {
        let w = self.weights(v);
        argmax(&w)
    }

    /// Largest |⟨ψ_i|ψ_j⟩ − δ_ij|.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        linalg::max_abs(&(gram - linalg::identity(self.dim())))
    }

    /// Largest ‖Hψ − ωψ‖ over states.
    pub fn max_residual(&self, h: &Operator) -> f64 {
        (0..self.dim())
            .map(|l| {
                let v = self.vector(l);
                (h.apply(&v) - &v * C64::new(self.values[l], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Diagonalizes a Hermitian Hamiltonian and labels each eigenstate by its
/// largest squared overlap with the displaced H0 eigenbasis.
pub fn diagonalize(h: &Operator, params: &ModelParams, space: &HilbertSpace) -> Result<EigenSystem> {
    let deviation = h.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    if h.dim() != space.dim_total() {
        return Err(Error::InvalidDimension(format!(
            "Hamiltonian side {} does not match space dimension {}",
            h.dim(),
            space.dim_total()
        )));
    }
    let (values, vectors) = linalg::hermitian_eigen(h.matrix());
    let displaced = model::displaced_basis(params, space)?;
    let labels = label_states(&vectors, &displaced, space)?;
    Ok(EigenSystem {
        values,
        vectors,
        labels,
    })
}

/// Unlabeled decomposition for hot loops.
pub(crate) fn eigen_unlabeled(h: &Operator) -> (DVector<f64>, CMatrix) {
    linalg::hermitian_eigen(h.matrix())
}

fn top_two(column: impl Iterator<Item = f64>) -> ((usize, f64), (usize, f64)) {
    let mut best = (0, f64::NEG_INFINITY);
    let mut second = (0, f64::NEG_INFINITY);
    for (i, w) in column.enumerate() {
        if w > best.1 {
            second = best;
            best = (i, w);
        } else if w > second.1 {
            second = (i, w);
        }
    }
    (best, second)
}

fn label_states(
    vectors: &CMatrix,
    displaced: &CMatrix,
    space: &HilbertSpace,
) -> Result<Vec<StateLabel>> {
    let overlaps = displaced.adjoint() * vectors;
    let dim = vectors.ncols();
    let mut labels = Vec::with_capacity(dim);
    for l in 0..dim {
        let (best, second) = top_two(overlaps.column(l).iter().map(|z| z.norm_sqr()));
        if best.1 - second.1 >= TIE_MARGIN {
            labels.push(StateLabel {
                label: space.label_at(best.0)?,
                overlap: best.1,
                displaced: true,
                tie: None,
            });
            continue;
        }
        let (bare_best, bare_second) =
            top_two(vectors.column(l).iter().map(|z| z.norm_sqr()));
        let tie = if bare_best.1 - bare_second.1 < TIE_MARGIN {
            Some(space.label_at(bare_second.0)?)
        } else {
            None
        };
        labels.push(StateLabel {
            label: space.label_at(bare_best.0)?,
            overlap: bare_best.1,
            displaced: false,
            tie,
        });
    }
    Ok(labels)
}
