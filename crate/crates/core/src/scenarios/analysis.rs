//! Small post-processing helpers for sampled series.

/// A local maximum located on a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Parabolic refinement of the sample time.
    pub t: f64,
    pub value: f64,
}

/// Maxima that dominate every sample within `half_window` in time and
/// exceed `floor`. Fast low-amplitude wiggles are ignored when the window is
/// a sizeable fraction of the slow period.
pub fn find_peaks(times: &[f64], values: &[f64], half_window: f64, floor: f64) -> Vec<Peak> {
    let n = values.len().min(times.len());
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let v = values[i];
        if v < floor {
            continue;
        }
        let dominated = (0..n)
            .filter(|&j| j != i && (times[j] - times[i]).abs() <= half_window)
            .any(|j| values[j] > v || (values[j] == v && j < i));
        // a maximum cut off by the end of the series is not a peak
        let clipped = times[i] - times[0] < half_window || times[n - 1] - times[i] < half_window;
        if dominated || clipped {
            continue;
        }
        let (y0, y1, y2) = (values[i - 1], v, values[i + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let shift = if denom.abs() > 0.0 {
            (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let dt = 0.5 * (times[i + 1] - times[i - 1]);
        peaks.push(Peak {
            index: i,
            t: times[i] + shift * dt,
            value: v,
        });
    }
    peaks
}

/// Oscillation angular frequency π / (mean peak spacing), for signals like
/// sin²(Ωt) whose peaks are π/Ω apart.
pub fn sin2_frequency(peaks: &[Peak]) -> Option<f64> {
    if peaks.len() < 2 {
        return None;
    }
    let span = peaks[peaks.len() - 1].t - peaks[0].t;
    let mean = span / (peaks.len() - 1) as f64;
    Some(std::f64::consts::PI / mean)
}

pub fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Pearson correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return f64::NAN;
    }
    let mean = |x: &[f64]| x[..n].iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    sab / (saa * sbb).sqrt()
}
