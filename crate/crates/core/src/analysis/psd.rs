use crate::dsp;
use crate::error::{Error, Result};
use crate::waveform::SampledSignal;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Two-sided power spectral density on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
}

impl PsdEstimate {
    /// Trapezoidal integral over the whole grid.
    pub fn integral(&self) -> f64 {
        self.frequencies
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(f, d)| (f[1] - f[0]) * (d[0] + d[1]) / 2.0)
            .sum()
    }

    pub fn bin_width(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }
}

/// Averaged periodogram with a periodic Hann window and 50% overlap.
///
/// The density is scaled so that summing it over all bins times the bin
/// width gives the mean power of the signal.
pub fn estimate_psd(signal: &SampledSignal, segment_length: usize) -> Result<PsdEstimate> {
    if segment_length < 2 {
        return Err(Error::invalid("segment_length", "must be at least 2"));
    }
    if signal.len() < 2 * segment_length {
        return Err(Error::SignalTooShort {
            required: 2 * segment_length,
            actual: signal.len(),
        });
    }
    let l = segment_length;
    let window: Vec<f64> = (0..l)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / l as f64).cos()))
        .collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let hop = l / 2;
    let segments = (signal.len() - l) / hop + 1;
    let mut acc = vec![0.0; l];
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for s in 0..segments {
        let start = s * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = signal.samples[start + i] * window[i];
        }
        dsp::fft_in_place(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * signal.sample_rate * wpow);
    // reorder to ascending frequency
    let neg = l / 2;
    let order: Vec<usize> = ((l - neg)..l).chain(0..(l - neg)).collect();
    Ok(PsdEstimate {
        frequencies: order
            .iter()
            .map(|&k| dsp::bin_frequency(k, l, signal.sample_rate))
            .collect(),
        density: order.iter().map(|&k| acc[k] * scale).collect(),
    })
}

/// Trapezoidal integral of the density over `[band.0, band.1]`, with linear
/// interpolation at the band edges.
pub fn band_power(psd: &PsdEstimate, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let f = &psd.frequencies;
    let (f0, f1) = (f[0], f[f.len() - 1]);
    if lo < f0 - 1e-9 * f1.abs() || hi > f1 + 1e-9 * f1.abs() || lo > hi {
        return Err(Error::BandOutOfRange {
            low: lo,
            high: hi,
            span_low: f0,
            span_high: f1,
        });
    }
    let (lo, hi) = (lo.max(f0), hi.min(f1));
    if hi <= lo {
        return Ok(0.0);
    }
    let d = &psd.density;
    let interp = |x: f64| -> f64 {
        let i = f.partition_point(|&v| v <= x).clamp(1, f.len() - 1);
        let t = (x - f[i - 1]) / (f[i] - f[i - 1]);
        d[i - 1] + t * (d[i] - d[i - 1])
    };
    let mut pts: Vec<(f64, f64)> = vec![(lo, interp(lo))];
    pts.extend(
        f.iter()
            .zip(d)
            .filter(|(&x, _)| x > lo && x < hi)
            .map(|(&x, &y)| (x, y)),
    );
    pts.push((hi, interp(hi)));
    Ok(pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::RngSeed;
    use crate::waveform::generate_symbols;

    fn noise(n: usize, seed: u64, fs: f64) -> SampledSignal {
        SampledSignal::new(generate_symbols(1, n, RngSeed(seed)).pop().unwrap(), fs)
    }

    #[test]
    fn single_tone() {
        let (n, fs, f0) = (1 << 16, 1000.0, 123.0);
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f0 * i as f64 / fs))
            .collect();
        let p = estimate_psd(&SampledSignal::new(x, fs), 1024).unwrap();
        assert!((p.integral() - 1.0).abs() < 0.02);
        let df = p.bin_width();
        let peak = p
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((p.frequencies[peak] - f0).abs() <= df);
        // the Hann main lobe spans two bins either side
        let near = band_power(&p, (f0 - 2.0 * df, f0 + 2.0 * df)).unwrap();
        assert!(near > 0.98 * p.integral(), "{near}");
    }

    #[test]
    fn white_noise_is_flat() {
        let fs = 50.0;
        let p = estimate_psd(&noise(64 * 1000, 1, fs), 64).unwrap();
        for d in &p.density {
            assert!((d * fs - 1.0).abs() < 0.1, "{}", d * fs);
        }
        let full = band_power(&p, (p.frequencies[0], *p.frequencies.last().unwrap())).unwrap();
        assert!((full - p.integral()).abs() < 1e-12);
        let half = band_power(&p, (-fs / 4.0, fs / 4.0)).unwrap();
        assert!((half / p.integral() - 0.5).abs() < 0.05);
        assert_eq!(band_power(&p, (3.0, 3.0)).unwrap(), 0.0);
        assert!(band_power(&p, (-fs, 0.0)).is_err());
    }

    #[test]
    fn independent_powers_add() {
        let fs = 1.0;
        let a = noise(1 << 16, 2, fs);
        let b = noise(1 << 16, 3, fs).scaled(0.5);
        let sum = SampledSignal::new(
            a.samples.iter().zip(&b.samples).map(|(x, y)| x + y).collect(),
            fs,
        );
        let pa = estimate_psd(&a, 512).unwrap().integral();
        let pb = estimate_psd(&b, 512).unwrap().integral();
        let ps = estimate_psd(&sum, 512).unwrap().integral();
        assert!((ps / (pa + pb) - 1.0).abs() < 0.03);
    }

    #[test]
    fn rejects_short_signal() {
        assert!(matches!(
            estimate_psd(&noise(100, 1, 1.0), 64),
            Err(Error::SignalTooShort { .. })
        ));
    }
}
