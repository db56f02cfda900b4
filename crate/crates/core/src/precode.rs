//! Maximum-ratio precoding, power allocation and array power scaling.

use crate::channel::{ChannelResponse, TapChannel};
use crate::dsp;
use crate::error::{Error, Result};
use crate::waveform::SampledSignal;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-antenna transmit signals of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodedFrame {
    pub per_antenna: Vec<SampledSignal>,
    pub total_power: f64,
}

impl PrecodedFrame {
    pub fn from_signals(per_antenna: Vec<SampledSignal>) -> Result<Self> {
        let first = per_antenna
            .first()
            .ok_or_else(|| Error::invalid("per_antenna", "frame has no antennas"))?;
        let (n, fs) = (first.len(), first.sample_rate);
        for s in &per_antenna {
            if s.len() != n {
                return Err(Error::LengthMismatch {
                    what: "samples per antenna",
                    expected: n,
                    actual: s.len(),
                });
            }
            if s.sample_rate != fs {
                return Err(Error::invalid("sample_rate", "antennas disagree on the sample rate"));
            }
        }
        let total_power = per_antenna.iter().map(SampledSignal::power).sum();
        Ok(PrecodedFrame {
            per_antenna,
            total_power,
        })
    }

    /// Single-antenna frame carrying `signal` scaled to `power`.
    pub fn single(signal: &SampledSignal, power: f64) -> Result<Self> {
        let p = signal.power();
        if !(p > 0.0) {
            return Err(Error::invalid("signal", "zero-power signal"));
        }
        PrecodedFrame::from_signals(vec![signal.scaled((power / p).sqrt())])
    }

    pub fn num_antennas(&self) -> usize {
        self.per_antenna.len()
    }

    pub fn len(&self) -> usize {
        self.per_antenna[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_antenna.is_empty() || self.per_antenna[0].is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.per_antenna[0].sample_rate
    }

    /// Mean over time of `Σ_m |x_m|²`, recomputed from the samples.
    pub fn measured_power(&self) -> f64 {
        self.per_antenna.iter().map(SampledSignal::power).sum()
    }

    /// DFT of each antenna signal, `[m][bin]`.
    pub fn spectra(&self) -> Vec<Vec<Complex64>> {
        self.per_antenna.par_iter().map(|s| dsp::fft(&s.samples)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    #[default]
    Equal,
    InversePathLoss,
}

/// Fractions of the total power given to each user.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub per_user_powers: Vec<f64>,
}

impl PowerAllocation {
    pub fn equal(k: usize) -> Self {
        PowerAllocation {
            per_user_powers: vec![1.0 / k as f64; k],
        }
    }

    pub fn num_users(&self) -> usize {
        self.per_user_powers.len()
    }
}

/// `path_gains` are linear amplitude gains; inverse path-loss allocation
/// gives `p_k ∝ 1/β_k²`.
pub fn allocate_power(path_gains: &[f64], mode: AllocationMode) -> Result<PowerAllocation> {
    if path_gains.is_empty() {
        return Err(Error::invalid("path_gains", "at least one user is required"));
    }
    match mode {
        AllocationMode::Equal => Ok(PowerAllocation::equal(path_gains.len())),
        AllocationMode::InversePathLoss => {
            if path_gains.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
                return Err(Error::invalid(
                    "path_gains",
                    "inverse path-loss allocation needs positive finite gains",
                ));
            }
            let raw: Vec<f64> = path_gains.iter().map(|b| 1.0 / (b * b)).collect();
            let s: f64 = raw.iter().sum();
            Ok(PowerAllocation {
                per_user_powers: raw.into_iter().map(|v| v / s).collect(),
            })
        }
    }
}

/// Array transmit power that gives each of `K` users the in-band power a
/// single antenna at `p_siso` delivers to one user: `P_array = K/M · P_SISO`.
pub fn siso_reference_power(p_siso: f64, m: usize, k: usize) -> Result<f64> {
    if k == 0 || m == 0 {
        return Err(Error::invalid("num_users", "M and K must be at least 1"));
    }
    if k > m {
        return Err(Error::invalid("num_users", format!("K = {k} exceeds M = {m}")));
    }
    Ok(p_siso * k as f64 / m as f64)
}

/// Maximum-ratio precoding in the frequency domain.
///
/// The user signals are treated as one period of a periodic sequence. Each
/// user's matched filter `conj(H)` is normalized to unit energy, weighted
/// by `sqrt(p_k)`, and the frame is finally scaled to `total_power`.
pub fn mrt_precode(
    user_signals: &[SampledSignal],
    channel: &dyn ChannelResponse,
    allocation: &PowerAllocation,
    total_power: f64,
) -> Result<PrecodedFrame> {
    let k_count = channel.num_users();
    if user_signals.len() != k_count {
        return Err(Error::LengthMismatch {
            what: "user signals",
            expected: k_count,
            actual: user_signals.len(),
        });
    }
    if allocation.num_users() != k_count {
        return Err(Error::LengthMismatch {
            what: "allocation entries",
            expected: k_count,
            actual: allocation.num_users(),
        });
    }
    let n = user_signals[0].len();
    let fs = user_signals[0].sample_rate;
    if n == 0 {
        return Err(Error::SignalTooShort { required: 1, actual: 0 });
    }
    for s in user_signals {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                what: "samples per user",
                expected: n,
                actual: s.len(),
            });
        }
        if s.sample_rate != fs {
            return Err(Error::invalid("sample_rate", "user signals disagree on the sample rate"));
        }
    }
    if !(total_power >= 0.0) {
        return Err(Error::invalid("total_power", "must be nonnegative"));
    }

    let m_count = channel.num_antennas();
    let delay = channel.matched_filter_delay();
    let ramp: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * dsp::bin_frequency(k, n, fs) * delay))
        .collect();

    let mut acc = vec![vec![Complex64::new(0.0, 0.0); n]; m_count];
    for (k, sig) in user_signals.iter().enumerate() {
        let energy = channel.user_energy(k, n, fs);
        if !(energy > 0.0) {
            return Err(Error::ZeroChannel { user: k });
        }
        let p = allocation.per_user_powers[k];
        if p == 0.0 {
            continue;
        }
        let g = (p / energy).sqrt();
        let spec = dsp::fft(&sig.samples);
        let h = channel.grid_response(k, n, fs);
        acc.par_iter_mut().zip(h.par_iter()).for_each(|(x, hm)| {
            for bin in 0..n {
                x[bin] += hm[bin].conj() * ramp[bin] * spec[bin] * g;
            }
        });
    }
    acc.par_iter_mut().for_each(|x| dsp::ifft_in_place(x));

    let realized: f64 = acc.iter().map(|x| dsp::mean_power(x)).sum();
    let scale = if total_power == 0.0 {
        0.0
    } else if realized > 0.0 {
        (total_power / realized).sqrt()
    } else {
        return Err(Error::invalid("user_signals", "precoded frame has zero power"));
    };
    let per_antenna = acc
        .into_iter()
        .map(|x| SampledSignal::new(x.into_iter().map(|v| v * scale).collect(), fs))
        .collect();
    PrecodedFrame::from_signals(per_antenna)
}

/// Time-domain MRT filters `w[m][k][l] = conj(h[m][k][L-1-l]) / sqrt(Σ|h_k|²)`.
pub fn mrt_filters(channel: &TapChannel) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let (m_count, k_count, l) = (channel.num_antennas(), channel.num_users(), channel.num_taps());
    let norms = (0..k_count)
        .map(|k| {
            let g = channel.user_gain(k);
            if g > 0.0 {
                Ok(g.sqrt())
            } else {
                Err(Error::ZeroChannel { user: k })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..m_count)
        .map(|m| {
            (0..k_count)
                .map(|k| {
                    let h = channel.taps(m, k);
                    (0..l).map(|i| h[l - 1 - i].conj() / norms[k]).collect()
                })
                .collect()
        })
        .collect())
}

/// Symbol-spaced impulse response from user `tx`'s stream to user `rx`:
/// `Σ_m h[m][rx] ⊛ w[m][tx]`, length `2L-1`.
pub fn effective_channel(
    channel: &TapChannel,
    filters: &[Vec<Vec<Complex64>>],
    rx: usize,
    tx: usize,
) -> Vec<Complex64> {
    let l = channel.num_taps();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * l - 1];
    for (m, fm) in filters.iter().enumerate() {
        let c = dsp::linear_convolve(channel.taps(m, rx), &fm[tx]);
        for (o, v) in out.iter_mut().zip(c) {
            *o += v;
        }
    }
    out
}
