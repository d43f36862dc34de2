use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{BareLabel, HilbertSpace};
use crate::linalg::CVector;
use crate::model::{self, ModelParams};

use super::eigen::eigen_unlabeled;

/// Absolute ωq tolerance of the golden-section search.
pub const OMEGA_Q_TOL: f64 = 1e-6;

/// Minimum of the gap between the two branches that hybridize a pair of
/// H0 eigenstates.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingResult {
    /// ωq at the minimum gap.
    pub omega_q_min: f64,
    /// Minimum gap 2Ω_eff.
    pub gap: f64,
    /// Eigen-indices (ascending energy) of the two branches at the minimum.
    pub branch_states: (usize, usize),
    /// Energies of the two branches at the minimum.
    pub branch_energies: (f64, f64),
    /// `hybrid_overlaps[b] = (|⟨first|ψ_b⟩|², |⟨second|ψ_b⟩|²)` for the
    /// lower (`b = 0`) and upper branch.
    pub hybrid_overlaps: [(f64, f64); 2],
    pub targets: (BareLabel, BareLabel),
}

impl SplittingResult {
    /// Ω_eff = gap / 2.
    pub fn omega_eff(&self) -> f64 {
        self.gap / 2.0
    }

    /// Whether both branches carry at least `threshold` weight on each
    /// target state.
    pub fn is_hybridized(&self, threshold: f64) -> bool {
        self.hybrid_overlaps
            .iter()
            .all(|&(a, b)| a >= threshold && b >= threshold)
    }
}

struct GapProbe {
    gap: f64,
    states: (usize, usize),
    energies: (f64, f64),
    overlaps: [(f64, f64); 2],
}

/// Gap between the two eigenstates carrying the most weight on
/// span{first, second}.
fn probe(
    params: &ModelParams,
    space: &HilbertSpace,
    omega_q: f64,
    targets: &(BareLabel, BareLabel),
) -> Result<GapProbe> {
    let p = params.with_omega_q(omega_q);
    let h = model::build_h(&p, space)?;
    let (values, vectors) = eigen_unlabeled(&h);
    let first: CVector = model::displaced_eigvec(&targets.0, &p, space)?;
    let second: CVector = model::displaced_eigvec(&targets.1, &p, space)?;
    let overlaps: Vec<(f64, f64)> = (0..values.len())
        .map(|l| {
            let col = vectors.column(l);
            (col.dotc(&first).norm_sqr(), col.dotc(&second).norm_sqr())
        })
        .collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        let wi = overlaps[i].0 + overlaps[i].1;
        let wj = overlaps[j].0 + overlaps[j].1;
        wj.total_cmp(&wi).then(i.cmp(&j))
    });
    let (lo, hi) = if order[0] < order[1] {
        (order[0], order[1])
    } else {
        (order[1], order[0])
    };
    Ok(GapProbe {
        gap: values[hi] - values[lo],
        states: (lo, hi),
        energies: (values[lo], values[hi]),
        overlaps: [overlaps[lo], overlaps[hi]],
    })
}

/// Gap of the tracked pair at a single ωq.
pub fn tracked_gap(
    params: &ModelParams,
    space: &HilbertSpace,
    omega_q: f64,
    targets: &(BareLabel, BareLabel),
) -> Result<f64> {
    Ok(probe(params, space, omega_q, targets)?.gap)
}

/// Locates the anticrossing of the model's resonant pair
/// (|0,1,g⟩ with |0,0,e⟩ for two-photon coupling, with |1,0,e⟩ for
/// one-photon coupling) inside `bracket`.
pub fn find_min_splitting(
    params: &ModelParams,
    space: &HilbertSpace,
    bracket: (f64, f64),
) -> Result<SplittingResult> {
    let targets = model::resonant_pair(params.coupling_kind);
    find_min_splitting_for(params, space, bracket, targets)
}

/// Golden-section minimization of the tracked gap over ωq.
pub fn find_min_splitting_for(
    params: &ModelParams,
    space: &HilbertSpace,
    bracket: (f64, f64),
    targets: (BareLabel, BareLabel),
) -> Result<SplittingResult> {
    params.validate()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: "need 0 < lo < hi".into(),
        });
    }
    let gap_at = |wq: f64| probe(params, space, wq, &targets).map(|p| p.gap);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = gap_at(c)?;
    let mut fd = gap_at(d)?;
    while (b - a) > OMEGA_Q_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap_at(d)?;
        }
    }
    let wq = 0.5 * (a + b);
    let best = probe(params, space, wq, &targets)?;

    let edge = 10.0 * OMEGA_Q_TOL;
    let (f_lo, f_hi) = (gap_at(lo)?, gap_at(hi)?);
    if wq - lo < edge || hi - wq < edge || best.gap >= f_lo || best.gap >= f_hi {
        return Err(Error::Bracket {
            lo,
            hi,
            reason: format!(
                "gap minimum at omega_q = {wq} is not interior (gap {:e}, ends {:e} / {:e})",
                best.gap, f_lo, f_hi
            ),
        });
    }

    Ok(SplittingResult {
        omega_q_min: wq,
        gap: best.gap,
        branch_states: best.states,
        branch_energies: best.energies,
        hybrid_overlaps: best.overlaps,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::AtomState;
    use crate::model::CouplingKind;

    #[test]
    fn two_photon_anticrossing() {
        let r = find_min_splitting(
            &ModelParams::two_photon_default(),
            &HilbertSpace::default(),
            (1.0, 1.1),
        )
        .unwrap();
        assert!((r.omega_q_min - 1.052).abs() < 0.003, "{}", r.omega_q_min);
        assert!((r.gap - 6.8e-3).abs() < 0.1 * 6.8e-3, "{}", r.gap);
        assert!(r.is_hybridized(0.4), "{:?}", r.hybrid_overlaps);
        assert_eq!(r.branch_states, (2, 3));
    }

    #[test]
    fn gap_positive_and_resonant_pair_defaults() {
        assert_eq!(
            model::resonant_pair(CouplingKind::OnePhoton).1,
            BareLabel::new(1, 0, AtomState::E)
        );
        let p = ModelParams::two_photon_default().with_couplings(0.02, 0.03);
        let r = find_min_splitting(&p, &HilbertSpace::new(6, 4).unwrap(), (1.0, 1.1)).unwrap();
        assert!(r.gap > 0.0);
    }

    #[test]
    fn bracket_without_interior_minimum() {
        let err = find_min_splitting(
            &ModelParams::two_photon_default(),
            &HilbertSpace::new(6, 4).unwrap(),
            (0.7, 0.9),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
        assert!(matches!(
            find_min_splitting(
                &ModelParams::two_photon_default(),
                &HilbertSpace::new(6, 4).unwrap(),
                (1.1, 1.0)
            ),
            Err(Error::Bracket { .. })
        ));
    }
}
