//! Symbol generation, root-raised-cosine pulse shaping and amplitude
//! statistics.

use crate::dsp;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Uniformly sampled complex-baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        SampledSignal { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean instantaneous power.
    pub fn power(&self) -> f64 {
        dsp::mean_power(&self.samples)
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn scaled(&self, a: f64) -> SampledSignal {
        SampledSignal::new(self.samples.iter().map(|v| v * a).collect(), self.sample_rate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub taps: Vec<f64>,
    pub oversampling_factor: usize,
    pub rolloff: f64,
}

impl PulseShape {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Index of the center tap.
    pub fn delay(&self) -> usize {
        self.taps.len() / 2
    }
}

/// Root-raised-cosine impulse response at `t` symbol periods (unnormalized).
fn rrc_value(beta: f64, t: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && ((4.0 * beta * t).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Unit-energy RRC filter spanning `span_symbols` symbols at `oversampling_factor`
/// samples per symbol.
pub fn design_rrc(rolloff: f64, span_symbols: usize, oversampling_factor: usize) -> Result<PulseShape> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::invalid("rolloff", format!("{rolloff} is outside [0, 1]")));
    }
    if span_symbols == 0 {
        return Err(Error::invalid("span_symbols", "must be at least 1"));
    }
    if oversampling_factor == 0 {
        return Err(Error::invalid("oversampling_factor", "must be at least 1"));
    }
    let half = span_symbols * oversampling_factor / 2;
    let os = oversampling_factor as f64;
    let mut taps: Vec<f64> = (0..=2 * half)
        .map(|i| rrc_value(rolloff, (i as f64 - half as f64) / os))
        .collect();
    let energy: f64 = taps.iter().map(|v| v * v).sum();
    let s = 1.0 / energy.sqrt();
    for v in &mut taps {
        *v *= s;
    }
    Ok(PulseShape {
        taps,
        oversampling_factor,
        rolloff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolAlphabet {
    /// Circularly-symmetric complex Gaussian.
    #[default]
    Gaussian,
    Qpsk,
}

/// `K` independent unit-power symbol streams. Gaussian by default.
pub fn generate_symbols(num_users: usize, num_symbols: usize, seed: RngSeed) -> Vec<Vec<Complex64>> {
    generate_symbols_with(SymbolAlphabet::Gaussian, num_users, num_symbols, seed)
}

pub fn generate_symbols_with(
    alphabet: SymbolAlphabet,
    num_users: usize,
    num_symbols: usize,
    seed: RngSeed,
) -> Vec<Vec<Complex64>> {
    (0..num_users)
        .map(|k| {
            let mut rng = seed.child("user-symbols", k as u64).rng();
            (0..num_symbols)
                .map(|_| match alphabet {
                    SymbolAlphabet::Gaussian => {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re, im) * FRAC_1_SQRT_2
                    }
                    SymbolAlphabet::Qpsk => {
                        let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        Complex64::new(re, im) * FRAC_1_SQRT_2
                    }
                })
                .collect()
        })
        .collect()
}

/// Zero-stuffed upsampling followed by linear convolution with the taps.
///
/// The output has `(N-1)·os + len(taps)` samples and is scaled by `sqrt(os)`
/// so that unit-power symbols give unit-power output.
pub fn pulse_shape(symbols: &[Complex64], shape: &PulseShape, baud_rate: f64) -> SampledSignal {
    let os = shape.oversampling_factor;
    let fs = baud_rate * os as f64;
    if symbols.is_empty() {
        return SampledSignal::new(Vec::new(), fs);
    }
    let mut up = vec![Complex64::new(0.0, 0.0); (symbols.len() - 1) * os + 1];
    for (i, s) in symbols.iter().enumerate() {
        up[i * os] = *s;
    }
    let g = (os as f64).sqrt();
    let h: Vec<Complex64> = shape.taps.iter().map(|&t| Complex64::new(t * g, 0.0)).collect();
    SampledSignal::new(dsp::linear_convolve(&up, &h), fs)
}

/// Pulse shaping of a symbol block treated as one period of a periodic
/// sequence. The output has exactly `N·os` samples, the center tap aligned
/// with each symbol, and no start-up transient.
pub fn pulse_shape_periodic(symbols: &[Complex64], shape: &PulseShape, baud_rate: f64) -> SampledSignal {
    let os = shape.oversampling_factor;
    let n = symbols.len() * os;
    let fs = baud_rate * os as f64;
    if n == 0 {
        return SampledSignal::new(Vec::new(), fs);
    }
    let mut up = vec![Complex64::new(0.0, 0.0); n];
    for (i, s) in symbols.iter().enumerate() {
        up[i * os] = *s;
    }
    let g = (os as f64).sqrt();
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    let d = shape.delay() as isize;
    for (i, &t) in shape.taps.iter().enumerate() {
        let idx = (i as isize - d).rem_euclid(n as isize) as usize;
        kernel[idx] += t * g;
    }
    SampledSignal::new(dsp::circular_convolve(&up, &kernel), fs)
}

/// Ratio, in dB, of the `percentile` quantile of instantaneous power to the
/// mean power.
pub fn peak_to_average_ratio(signal: &SampledSignal, percentile: f64) -> Result<f64> {
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::invalid("percentile", format!("{percentile} is outside (0, 1)")));
    }
    if signal.is_empty() {
        return Err(Error::SignalTooShort { required: 1, actual: 0 });
    }
    let mut p: Vec<f64> = signal.samples.iter().map(|v| v.norm_sqr()).collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.sort_by(f64::total_cmp);
    let idx = ((percentile * p.len() as f64).ceil() as usize).clamp(1, p.len()) - 1;
    Ok(dsp::db(p[idx] / mean))
}
