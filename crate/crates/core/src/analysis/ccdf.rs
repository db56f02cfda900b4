use crate::dsp;
use crate::error::{Error, Result};

/// Empirical `P(X > t)` on a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub probability: Vec<f64>,
}

impl CcdfCurve {
    /// Probability at the first threshold `≥ t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let i = self.thresholds.partition_point(|&v| v < t);
        self.probability.get(i).copied()
    }
}

pub fn empirical_ccdf(samples: &[f64], thresholds: &[f64]) -> Result<CcdfCurve> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty sample set"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let probability = thresholds
        .iter()
        .map(|&t| (v.len() - v.partition_point(|&x| x <= t)) as f64 / n)
        .collect();
    Ok(CcdfCurve {
        thresholds: thresholds.to_vec(),
        probability,
    })
}

/// Evenly spaced grid `[lo, hi]` with the given step.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Mean taken in linear power, reported in dB.
pub fn mean_db(samples_db: &[f64]) -> f64 {
    let m = samples_db.iter().map(|&x| dsp::from_db(x)).sum::<f64>() / samples_db.len() as f64;
    dsp::db(m)
}

/// Standard deviation of dB values.
pub fn std_db(samples_db: &[f64]) -> f64 {
    let n = samples_db.len() as f64;
    let mean = samples_db.iter().sum::<f64>() / n;
    (samples_db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear-interpolated sample quantile, `q` in `[0, 1]`.
pub fn percentile(samples: &[f64], q: f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(v.len() - 1);
    v[i] + (pos - i as f64) * (v[j] - v[i])
}
