//! Dormand–Prince 5(4) with adaptive steps, for matrix-valued ODEs.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on a single step, if any.
    pub max_step: Option<f64>,
    /// Steps shorter than this (relative to |t| + 1) abort the run.
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            min_step: 1e-12,
        }
    }
}

/// Counters collected during integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator state. The FSAL derivative is carried between calls
/// to [`Dopri5::advance`].
pub struct Dopri5<F>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    rhs: F,
    tol: Tolerances,
    t: f64,
    y: CMatrix,
    k1: CMatrix,
    h: f64,
    stats: StepStats,
}

fn axpy(y: &CMatrix, terms: &[(f64, &CMatrix)], h: f64) -> CMatrix {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            let s = h * c;
            out.zip_apply(k, |o, x| *o += x * s);
        }
    }
    out
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    pub fn new(mut rhs: F, t0: f64, y0: CMatrix, tol: Tolerances) -> Self {
        let k1 = rhs(t0, &y0);
        Dopri5 {
            rhs,
            tol,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            stats: StepStats {
                rhs_evals: 1,
                ..StepStats::default()
            },
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &CMatrix {
        &self.y
    }

    /// Replaces the state at the current time, e.g. after re-Hermitizing.
    pub fn set_state(&mut self, y: CMatrix) {
        self.k1 = (self.rhs)(self.t, &y);
        self.stats.rhs_evals += 1;
        self.y = y;
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// RMS error norm scaled by atol + rtol·max(|y|, |y_new|), counting
    /// real and imaginary parts separately.
    fn error_norm(&self, err: &CMatrix, y_new: &CMatrix) -> f64 {
        let mut acc = 0.0;
        for ((e, a), b) in err.iter().zip(self.y.iter()).zip(y_new.iter()) {
            let sr = self.tol.atol + self.tol.rtol * a.re.abs().max(b.re.abs());
            let si = self.tol.atol + self.tol.rtol * a.im.abs().max(b.im.abs());
            acc += (e.re / sr).powi(2) + (e.im / si).powi(2);
        }
        (acc / (2 * err.len()).max(1) as f64).sqrt()
    }

    fn initial_step(&self, span: f64) -> f64 {
        let scale = |y: &CMatrix| {
            y.iter()
                .map(|z| {
                    let s = self.tol.atol + self.tol.rtol * z.norm();
                    (z.norm() / s).powi(2)
                })
                .sum::<f64>()
                .sqrt()
                / (y.len().max(1) as f64).sqrt()
        };
        let d0 = scale(&self.y);
        let d1 = {
            let mut acc = 0.0;
            for (k, y) in self.k1.iter().zip(self.y.iter()) {
                let s = self.tol.atol + self.tol.rtol * y.norm();
                acc += (k.norm() / s).powi(2);
            }
            (acc / self.y.len().max(1) as f64).sqrt()
        };
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let mut h = h.min(span.abs());
        if let Some(m) = self.tol.max_step {
            h = h.min(m);
        }
        h
    }

    /// Integrates forward to exactly `t_end`.
    pub fn advance(&mut self, t_end: f64) -> Result<()> {
        if t_end <= self.t {
            return Ok(());
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(t_end - self.t);
        }
        let mut last_rejected = false;
        while self.t < t_end {
            let remaining = t_end - self.t;
            let mut h = self.h.min(remaining);
            if let Some(m) = self.tol.max_step {
                h = h.min(m);
            }
            // land on t_end instead of leaving a sliver
            let final_step = h >= remaining * (1.0 - 1e-12);
            if final_step {
                h = remaining;
            }
            if h < self.tol.min_step * (self.t.abs() + 1.0) {
                return Err(Error::Stiffness { t: self.t, h });
            }

            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let rhs = &mut self.rhs;
            let k2 = rhs(t + C2 * h, &axpy(y, &[(A21, k1)], h));
            let k3 = rhs(t + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h));
            let k4 = rhs(t + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
            let k5 = rhs(
                t + C5 * h,
                &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = rhs(
                t + h,
                &axpy(
                    y,
                    &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y_new = axpy(
                y,
                &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                h,
            );
            let k7 = rhs(t + h, &y_new);
            self.stats.rhs_evals += 6;

            let err = axpy(
                &CMatrix::zeros(y.nrows(), y.ncols()),
                &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                h,
            );
            let en = self.error_norm(&err, &y_new);

            if en <= 1.0 {
                self.t = if final_step { t_end } else { t + h };
                self.y = y_new;
                self.k1 = k7;
                self.stats.accepted += 1;
                let factor = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                let factor = if last_rejected { factor.min(1.0) } else { factor };
                // keep the step the controller wanted, not the one clipped
                // to the sample time
                self.h = if final_step && h < self.h {
                    self.h.max(h * factor)
                } else {
                    h * factor
                };
                last_rejected = false;
            } else {
                self.stats.rejected += 1;
                self.h = h * (0.9 * en.powf(-0.2)).max(0.2);
                last_rejected = true;
            }
        }
        Ok(())
    }
}
