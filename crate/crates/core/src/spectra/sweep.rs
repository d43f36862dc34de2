use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::HilbertSpace;
use crate::linalg::CMatrix;
use crate::model::{self, ModelParams};

use super::eigen::eigen_unlabeled;

/// Minimum adjacent-point overlap below which the grid is flagged as too
/// coarse for branch continuity.
pub const CONTINUITY_THRESHOLD: f64 = 0.5;

/// Extra eigenstates considered as continuation candidates above the
/// tracked window, so a branch can be followed when it leaves it.
const EXTRA_CANDIDATES: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityWarning {
    /// Grid index of the later point of the offending pair.
    pub index: usize,
    pub omega_q: f64,
    pub branch: usize,
    pub overlap: f64,
}

/// Branch-tracked energies `levels[i][b]` at `omega_q[i]`, relative to the
/// ground energy at that point.
#[derive(Debug, Clone, Serialize)]
pub struct LevelTable {
    pub omega_q: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
    pub ground_energy: Vec<f64>,
    pub warnings: Vec<ContinuityWarning>,
}

impl LevelTable {
    pub fn n_levels(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    /// One branch across the grid.
    pub fn branch(&self, b: usize) -> Vec<f64> {
        self.levels.iter().map(|row| row[b]).collect()
    }
}

/// Lowest `n_levels` excited levels (the ground state is branch 0 with
/// energy 0) over an ωq grid, with branches followed by eigenvector overlap
/// between adjacent grid points rather than by sorted index.
pub fn sweep_levels(
    params: &ModelParams,
    space: &HilbertSpace,
    omega_q_grid: &[f64],
    n_levels: usize,
) -> Result<LevelTable> {
    if omega_q_grid.is_empty() {
        return Err(Error::InvalidParams("empty omega_q grid".into()));
    }
    let increasing = omega_q_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = omega_q_grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParams("omega_q grid must be strictly monotone".into()));
    }
    let dim = space.dim_total();
    let n_levels = n_levels.min(dim);
    let n_candidates = (n_levels + EXTRA_CANDIDATES).min(dim);

    let points = omega_q_grid
        .par_iter()
        .map(|&wq| {
            let h = model::build_h(&params.with_omega_q(wq), space)?;
            let (values, vectors) = eigen_unlabeled(&h);
            Ok((
                values.iter().take(n_candidates).copied().collect::<Vec<f64>>(),
                vectors.columns(0, n_candidates).into_owned(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut levels = Vec::with_capacity(points.len());
    let mut ground = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    let (first_values, first_vectors) = &points[0];
    levels.push(relative(&first_values[..n_levels], first_values[0]));
    ground.push(first_values[0]);
    let mut tracked: CMatrix = first_vectors.columns(0, n_levels).into_owned();

    for (i, (values, vectors)) in points.iter().enumerate().skip(1) {
        let assignment = match_branches(&tracked, vectors);
        let mut row = Vec::with_capacity(n_levels);
        let mut next = CMatrix::zeros(dim, n_levels);
        for (branch, &(candidate, overlap)) in assignment.iter().enumerate() {
            if overlap < CONTINUITY_THRESHOLD {
                warnings.push(ContinuityWarning {
                    index: i,
                    omega_q: omega_q_grid[i],
                    branch,
                    overlap,
                });
            }
            row.push(values[candidate] - values[0]);
            next.set_column(branch, &vectors.column(candidate));
        }
        for w in warnings.iter().filter(|w| w.index == i) {
            log::warn!(
                "branch {} loses continuity at omega_q = {} (overlap {:.3}); refine the grid",
                w.branch,
                w.omega_q,
                w.overlap
            );
        }
        levels.push(row);
        ground.push(values[0]);
        tracked = next;
    }

    Ok(LevelTable {
        omega_q: omega_q_grid.to_vec(),
        levels,
        ground_energy: ground,
        warnings,
    })
}

fn relative(values: &[f64], ground: f64) -> Vec<f64> {
    values.iter().map(|v| v - ground).collect()
}

/// Greedy maximal-overlap assignment of tracked branches to candidates.
/// Returns `(candidate index, |overlap|)` per branch.
fn match_branches(tracked: &CMatrix, candidates: &CMatrix) -> Vec<(usize, f64)> {
    let overlaps = tracked.adjoint() * candidates;
    let (nb, nc) = (overlaps.nrows(), overlaps.ncols());
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(nb * nc);
    for b in 0..nb {
        for c in 0..nc {
            pairs.push((overlaps[(b, c)].norm(), b, c));
        }
    }
    // descending overlap; ties broken by index so the pass is deterministic
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut assignment = vec![None; nb];
    let mut used = vec![false; nc];
    for (overlap, b, c) in pairs {
        if assignment[b].is_none() && !used[c] {
            assignment[b] = Some((c, overlap));
            used[c] = true;
        }
    }
    assignment
        .into_iter()
        .map(|a| a.expect("more candidates than tracked branches"))
        .collect()
}

/// Evenly spaced grid including both ends.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
