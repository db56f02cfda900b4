use super::ChannelResponse;
use crate::dsp;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Tap-power profile across the delay spread.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerDelayProfile {
    #[default]
    Uniform,
    Exponential { decay_db_per_tap: f64 },
}

impl PowerDelayProfile {
    /// Per-tap variances, summing to one.
    pub fn variances(&self, num_taps: usize) -> Vec<f64> {
        let raw: Vec<f64> = match *self {
            PowerDelayProfile::Uniform => vec![1.0; num_taps],
            PowerDelayProfile::Exponential { decay_db_per_tap } => (0..num_taps)
                .map(|l| dsp::from_db(-decay_db_per_tap * l as f64))
                .collect(),
        };
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }
}

/// Frequency-selective channel with `L` taps per (antenna, user) pair,
/// spaced `tap_spacing` seconds apart.
#[derive(Debug, Clone, PartialEq)]
pub struct TapChannel {
    num_antennas: usize,
    num_users: usize,
    num_taps: usize,
    pub tap_spacing: f64,
    taps: Vec<Complex64>,
}

impl TapChannel {
    /// Builds a channel from taps laid out as `h[m][k][l]`.
    pub fn from_taps(taps: Vec<Vec<Vec<Complex64>>>, tap_spacing: f64) -> Result<Self> {
        let m = taps.len();
        if m == 0 {
            return Err(Error::invalid("taps", "no antennas"));
        }
        let k = taps[0].len();
        if k == 0 {
            return Err(Error::invalid("taps", "no users"));
        }
        let l = taps[0][0].len();
        if l == 0 {
            return Err(Error::invalid("taps", "no taps"));
        }
        let mut flat = Vec::with_capacity(m * k * l);
        for per_antenna in &taps {
            if per_antenna.len() != k {
                return Err(Error::LengthMismatch {
                    what: "users per antenna",
                    expected: k,
                    actual: per_antenna.len(),
                });
            }
            for per_user in per_antenna {
                if per_user.len() != l {
                    return Err(Error::LengthMismatch {
                        what: "taps per user",
                        expected: l,
                        actual: per_user.len(),
                    });
                }
                flat.extend_from_slice(per_user);
            }
        }
        if !(tap_spacing > 0.0) {
            return Err(Error::invalid("tap_spacing", "must be positive"));
        }
        Ok(TapChannel {
            num_antennas: m,
            num_users: k,
            num_taps: l,
            tap_spacing,
            taps: flat,
        })
    }

    pub fn num_taps(&self) -> usize {
        self.num_taps
    }

    /// Taps `h[m][k][·]`.
    pub fn taps(&self, m: usize, k: usize) -> &[Complex64] {
        let start = (m * self.num_users + k) * self.num_taps;
        &self.taps[start..start + self.num_taps]
    }

    /// `Σ_{m,l} |h[m][k][l]|²`.
    pub fn user_gain(&self, k: usize) -> f64 {
        (0..self.num_antennas)
            .flat_map(|m| self.taps(m, k))
            .map(|v| v.norm_sqr())
            .sum()
    }

    /// Length-`period` DFT of each antenna's taps for `user`, `[m][bin]`.
    /// Taps beyond `period` alias, matching the response sampled on a grid
    /// whose spacing is `1/(period·tap_spacing)`.
    pub fn periodic_response(&self, user: usize, period: usize) -> Vec<Vec<Complex64>> {
        (0..self.num_antennas)
            .map(|m| {
                let mut buf = vec![Complex64::new(0.0, 0.0); period];
                for (l, h) in self.taps(m, user).iter().enumerate() {
                    buf[l % period] += h;
                }
                dsp::fft_in_place(&mut buf);
                buf
            })
            .collect()
    }

    /// Samples per tap on a grid at `sample_rate`, if integral.
    fn samples_per_tap(&self, sample_rate: f64) -> Option<usize> {
        let s = self.tap_spacing * sample_rate;
        let r = s.round();
        ((s - r).abs() < 1e-9 * s.max(1.0) && r >= 1.0).then_some(r as usize)
    }
}

impl ChannelResponse for TapChannel {
    fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    fn num_users(&self) -> usize {
        self.num_users
    }

    fn response(&self, user: usize, freq: f64) -> Vec<Complex64> {
        let w = -2.0 * PI * freq * self.tap_spacing;
        (0..self.num_antennas)
            .map(|m| {
                self.taps(m, user)
                    .iter()
                    .enumerate()
                    .map(|(l, h)| h * Complex64::from_polar(1.0, w * l as f64))
                    .sum()
            })
            .collect()
    }

    fn grid_response(&self, user: usize, n: usize, sample_rate: f64) -> Vec<Vec<Complex64>> {
        match self.samples_per_tap(sample_rate) {
            Some(s) if n % s == 0 => {
                let period = n / s;
                self.periodic_response(user, period)
                    .into_iter()
                    .map(|hp| (0..n).map(|k| hp[k % period]).collect())
                    .collect()
            }
            _ => {
                let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; self.num_antennas];
                for k in 0..n {
                    let h = self.response(user, dsp::bin_frequency(k, n, sample_rate));
                    for (m, v) in h.into_iter().enumerate() {
                        out[m][k] = v;
                    }
                }
                out
            }
        }
    }

    fn matched_filter_delay(&self) -> f64 {
        (self.num_taps - 1) as f64 * self.tap_spacing
    }

    fn user_energy(&self, user: usize, _n: usize, _sample_rate: f64) -> f64 {
        self.user_gain(user)
    }
}

/// I.i.d. Rayleigh taps with a uniform power-delay profile: each tap is
/// CN(0, 1/L).
pub fn sample_rayleigh(m: usize, k: usize, l: usize, tap_spacing: f64, seed: RngSeed) -> Result<TapChannel> {
    sample_rayleigh_with(m, k, l, PowerDelayProfile::Uniform, tap_spacing, seed)
}

pub fn sample_rayleigh_with(
    m: usize,
    k: usize,
    l: usize,
    profile: PowerDelayProfile,
    tap_spacing: f64,
    seed: RngSeed,
) -> Result<TapChannel> {
    if m == 0 || k == 0 || l == 0 {
        return Err(Error::invalid("dimensions", "M, K and L must all be at least 1"));
    }
    if !(tap_spacing > 0.0) {
        return Err(Error::invalid("tap_spacing", "must be positive"));
    }
    let sd: Vec<f64> = profile.variances(l).into_iter().map(|v| v.sqrt() * FRAC_1_SQRT_2).collect();
    let mut rng = seed.rng();
    let mut taps = Vec::with_capacity(m * k * l);
    for _ in 0..m * k {
        for s in &sd {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            taps.push(Complex64::new(re * s, im * s));
        }
    }
    Ok(TapChannel {
        num_antennas: m,
        num_users: k,
        num_taps: l,
        tap_spacing,
        taps,
    })
}
