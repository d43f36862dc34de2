//! Truncated Fock spaces and the composite photon ⊗ phonon ⊗ atom space.
//!
//! Basis ordering is fixed everywhere (including file output): the photon
//! index varies slowest, then the phonon index, then the atom with
//! `g = 0`, `e = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Cutoffs of the composite space. Photon states `0..=n_photon_max`,
/// phonon states `0..=n_phonon_max`, and a two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct HilbertSpace {
    n_photon_max: usize,
    n_phonon_max: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    n_photon_max: usize,
    n_phonon_max: usize,
}

impl TryFrom<RawSpace> for HilbertSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        HilbertSpace::new(raw.n_photon_max, raw.n_phonon_max)
    }
}

impl From<HilbertSpace> for RawSpace {
    fn from(space: HilbertSpace) -> Self {
        RawSpace {
            n_photon_max: space.n_photon_max,
            n_phonon_max: space.n_phonon_max,
        }
    }
}

impl HilbertSpace {
    pub const MIN_PHOTON_MAX: usize = 4;
    pub const MIN_PHONON_MAX: usize = 3;

    pub fn new(n_photon_max: usize, n_phonon_max: usize) -> Result<Self> {
        if n_photon_max < Self::MIN_PHOTON_MAX || n_phonon_max < Self::MIN_PHONON_MAX {
            return Err(Error::InvalidDimension(format!(
                "need n_photon_max >= {} and n_phonon_max >= {}, got {} and {}",
                Self::MIN_PHOTON_MAX,
                Self::MIN_PHONON_MAX,
                n_photon_max,
                n_phonon_max
            )));
        }
        Ok(HilbertSpace {
            n_photon_max,
            n_phonon_max,
        })
    }

    /// Default truncation (dimension 154).
    pub fn default_truncation() -> Self {
        HilbertSpace {
            n_photon_max: 10,
            n_phonon_max: 6,
        }
    }

    pub fn n_photon_max(&self) -> usize {
        self.n_photon_max
    }

    pub fn n_phonon_max(&self) -> usize {
        self.n_phonon_max
    }

    /// Same space with both cutoffs raised by `by`.
    pub fn enlarged(&self, by: usize) -> Self {
        HilbertSpace {
            n_photon_max: self.n_photon_max + by,
            n_phonon_max: self.n_phonon_max + by,
        }
    }

    pub fn factor_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Cavity => self.n_photon_max + 1,
            Slot::Mechanics => self.n_phonon_max + 1,
            Slot::Atom => 2,
        }
    }

    pub fn dim_total(&self) -> usize {
        self.factor_dim(Slot::Cavity) * self.factor_dim(Slot::Mechanics) * 2
    }

    /// Iterates all labels in basis order.
    pub fn labels(&self) -> impl Iterator<Item = BareLabel> + '_ {
        (0..=self.n_photon_max).flat_map(move |n| {
            (0..=self.n_phonon_max).flat_map(move |k| {
                [AtomState::G, AtomState::E]
                    .into_iter()
                    .map(move |q| BareLabel::new(n, k, q))
            })
        })
    }

    /// Inverse of [`basis_index`].
    pub fn label_at(&self, index: usize) -> Result<BareLabel> {
        if index >= self.dim_total() {
            return Err(Error::InvalidLabel(format!(
                "index {index} outside 0..{}",
                self.dim_total()
            )));
        }
        let per_photon = (self.n_phonon_max + 1) * 2;
        let n = index / per_photon;
        let k = (index % per_photon) / 2;
        let q = if index % 2 == 0 {
            AtomState::G
        } else {
            AtomState::E
        };
        Ok(BareLabel::new(n, k, q))
    }

    pub fn contains(&self, label: &BareLabel) -> bool {
        label.n <= self.n_photon_max && label.k <= self.n_phonon_max
    }
}

impl Default for HilbertSpace {
    fn default() -> Self {
        Self::default_truncation()
    }
}

/// Tensor factor of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Cavity,
    Mechanics,
    Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomState {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "e")]
    E,
}

impl AtomState {
    pub fn index(self) -> usize {
        match self {
            AtomState::G => 0,
            AtomState::E => 1,
        }
    }

    /// Eigenvalue of σz, with σz|e⟩ = +|e⟩.
    pub fn sigma_z(self) -> f64 {
        match self {
            AtomState::G => -1.0,
            AtomState::E => 1.0,
        }
    }
}

/// Bare product state |n, k, q⟩: `n` photons, `k` phonons, atom in `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BareLabel {
    pub n: usize,
    pub k: usize,
    pub q: AtomState,
}

impl BareLabel {
    pub const fn new(n: usize, k: usize, q: AtomState) -> Self {
        BareLabel { n, k, q }
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = match self.q {
            AtomState::G => 'g',
            AtomState::E => 'e',
        };
        write!(f, "|{},{},{}>", self.n, self.k, q)
    }
}

/// Which space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    /// A single tensor factor of the given dimension.
    Factor(usize),
    /// The full composite space.
    Composite(HilbertSpace),
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match self {
            SpaceTag::Factor(d) => *d,
            SpaceTag::Composite(space) => space.dim_total(),
        }
    }
}

/// Dense complex operator with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    tag: SpaceTag,
}

impl Operator {
    pub fn new(matrix: CMatrix, tag: SpaceTag) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != tag.dim() {
            return Err(Error::InvalidDimension(format!(
                "{}x{} matrix does not match declared side {}",
                matrix.nrows(),
                matrix.ncols(),
                tag.dim()
            )));
        }
        Ok(Operator { matrix, tag })
    }

    pub fn factor(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Operator::new(matrix, SpaceTag::Factor(d))
    }

    pub fn composite(matrix: CMatrix, space: HilbertSpace) -> Result<Self> {
        Operator::new(matrix, SpaceTag::Composite(space))
    }

    pub fn identity_on(tag: SpaceTag) -> Self {
        Operator {
            matrix: linalg::identity(tag.dim()),
            tag,
        }
    }

    pub fn zeros_on(tag: SpaceTag) -> Self {
        let d = tag.dim();
        Operator {
            matrix: CMatrix::zeros(d, d),
            tag,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            tag: self.tag,
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Operator product `self · rhs`.
    pub fn mul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.tag, rhs.tag, "operators act on different spaces");
        Operator {
            matrix: linalg::matmul(&self.matrix, &rhs.matrix),
            tag: self.tag,
        }
    }

    pub fn add(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.tag, rhs.tag, "operators act on different spaces");
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            tag: self.tag,
        }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            matrix: &self.matrix * C64::new(factor, 0.0),
            tag: self.tag,
        }
    }

    pub fn commutator(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.tag, rhs.tag, "operators act on different spaces");
        Operator {
            matrix: linalg::commutator(&self.matrix, &rhs.matrix),
            tag: self.tag,
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// ⟨u|O|v⟩.
    pub fn element(&self, u: &CVector, v: &CVector) -> C64 {
        u.dotc(&(&self.matrix * v))
    }
}

/// Truncated bosonic annihilation operator with ⟨m−1|a|m⟩ = √m.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "ladder operator needs dim >= 2, got {dim}"
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for level in 1..dim {
        m[(level - 1, level)] = C64::new((level as f64).sqrt(), 0.0);
    }
    Operator::factor(m)
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

/// σ− = |g⟩⟨e|.
pub fn sigma_minus() -> Operator {
    let mut m = CMatrix::zeros(2, 2);
    m[(AtomState::G.index(), AtomState::E.index())] = linalg::ONE;
    Operator {
        matrix: m,
        tag: SpaceTag::Factor(2),
    }
}

/// σz with σz|e⟩ = +|e⟩.
pub fn sigma_z() -> Operator {
    let mut m = CMatrix::zeros(2, 2);
    for q in [AtomState::G, AtomState::E] {
        m[(q.index(), q.index())] = C64::new(q.sigma_z(), 0.0);
    }
    Operator {
        matrix: m,
        tag: SpaceTag::Factor(2),
    }
}

/// σx = σ− + σ+.
pub fn sigma_x() -> Operator {
    let sm = sigma_minus();
    sm.add(&sm.adjoint())
}

/// Embeds a single-factor operator into the composite space, with
/// identities on the other factors.
pub fn embed(op: &Operator, slot: Slot, space: &HilbertSpace) -> Result<Operator> {
    let expected = space.factor_dim(slot);
    if op.tag() != SpaceTag::Factor(expected) {
        return Err(Error::InvalidDimension(format!(
            "{slot:?} factor has dimension {expected}, operator has side {}",
            op.dim()
        )));
    }
    let id_c = linalg::identity(space.factor_dim(Slot::Cavity));
    let id_m = linalg::identity(space.factor_dim(Slot::Mechanics));
    let id_q = linalg::identity(2);
    let m = match slot {
        Slot::Cavity => linalg::kron(&linalg::kron(op.matrix(), &id_m), &id_q),
        Slot::Mechanics => linalg::kron(&linalg::kron(&id_c, op.matrix()), &id_q),
        Slot::Atom => linalg::kron(&linalg::kron(&id_c, &id_m), op.matrix()),
    };
    Operator::composite(m, *space)
}

/// Displacement operator exp[α(b − b†)] on a truncated phonon space of
/// dimension `dim`, evaluated as the matrix exponential of the truncated
/// generator (which is real antisymmetric, so the result is orthogonal).
pub fn displacement(alpha: f64, dim: usize) -> Result<Operator> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParams(format!(
            "displacement amplitude must be finite, got {alpha}"
        )));
    }
    let b = annihilation(dim)?;
    let generator = b.matrix().map(|z| z.re) - b.matrix().map(|z| z.re).transpose();
    let d = (generator * alpha).exp();
    Operator::factor(d.map(|x| C64::new(x, 0.0)))
}

/// Position of a bare label in the composite basis.
pub fn basis_index(label: &BareLabel, space: &HilbertSpace) -> Result<usize> {
    if !space.contains(label) {
        return Err(Error::InvalidLabel(format!(
            "{label} outside cutoffs (n <= {}, k <= {})",
            space.n_photon_max(),
            space.n_phonon_max()
        )));
    }
    Ok(label.n * (space.n_phonon_max() + 1) * 2 + label.k * 2 + label.q.index())
}

/// Bare product state as a composite-space vector.
pub fn bare_state(label: &BareLabel, space: &HilbertSpace) -> Result<CVector> {
    Ok(linalg::basis_vector(
        space.dim_total(),
        basis_index(label, space)?,
    ))
}

/// Product state |photon⟩ ⊗ |phonon⟩ ⊗ |atom⟩ from factor vectors.
pub fn product_state(photon: &CVector, phonon: &CVector, atom: &CVector) -> CVector {
    photon.kronecker(phonon).kronecker(atom)
}
