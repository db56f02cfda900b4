use super::bands::{BandBins, BandSpec};
use crate::dsp;
use crate::error::Result;
use crate::geometry::{delay_step, Direction, UlaGeometry};
use crate::precode::PrecodedFrame;
use crate::waveform::SampledSignal;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Radiated in-band and adjacent-band power per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    pub angles: Vec<Direction>,
    pub inband_power: Vec<f64>,
    /// Strongest adjacent band.
    pub oob_power: Vec<f64>,
}

/// `r(t) = Σ_m x_m(t - τ_m(θ))`, applied per DFT bin at the absolute
/// frequency `f_c + f`.
pub fn far_field_signal(frame: &PrecodedFrame, geometry: &UlaGeometry, direction: Direction) -> SampledSignal {
    let n = frame.len();
    let fs = frame.sample_rate();
    let step = delay_step(geometry, direction);
    let fc = geometry.carrier_frequency;
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (m, sig) in frame.per_antenna.iter().enumerate() {
        let spec = dsp::fft(&sig.samples);
        let tau = m as f64 * step;
        for (k, (a, x)) in acc.iter_mut().zip(&spec).enumerate() {
            let f = fc + dsp::bin_frequency(k, n, fs);
            *a += x * Complex64::from_polar(1.0, -2.0 * PI * f * tau);
        }
    }
    dsp::ifft_in_place(&mut acc);
    SampledSignal::new(acc, fs)
}

/// In-band and strongest-adjacent-band power of the far-field signal at
/// every grid angle.
pub fn beampattern(
    frame: &PrecodedFrame,
    geometry: &UlaGeometry,
    angle_grid: &[Direction],
    bands: &BandSpec,
) -> Result<Beampattern> {
    let n = frame.len();
    let fs = frame.sample_rate();
    let bins = BandBins::new(n, fs, bands)?;
    let order = bins.all();
    let spectra = frame.spectra();
    let m_count = spectra.len();
    // [bin][m] for cache-friendly Horner evaluation
    let yt: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&k| (0..m_count).map(|m| spectra[m][k]).collect())
        .collect();
    let fabs: Vec<f64> = order
        .iter()
        .map(|&k| geometry.carrier_frequency + dsp::bin_frequency(k, n, fs))
        .collect();

    let powers: Vec<(f64, f64)> = angle_grid
        .par_iter()
        .map(|&dir| {
            let step = delay_step(geometry, dir);
            let mags: Vec<f64> = yt
                .iter()
                .zip(&fabs)
                .map(|(y, &f)| {
                    let z = Complex64::from_polar(1.0, -2.0 * PI * f * step);
                    let mut r = Complex64::new(0.0, 0.0);
                    for v in y.iter().rev() {
                        r = r * z + v;
                    }
                    r.norm_sqr()
                })
                .collect();
            let p = bins.powers_from_ordered(&mags);
            (p.allocated, p.oob())
        })
        .collect();

    Ok(Beampattern {
        angles: angle_grid.to_vec(),
        inband_power: powers.iter().map(|p| p.0).collect(),
        oob_power: powers.iter().map(|p| p.1).collect(),
    })
}

/// Width in degrees of the main lobe around the maximum of `power`, where
/// it stays above half the peak. Crossings are linearly interpolated in dB.
pub fn half_power_beamwidth_deg(angles: &[Direction], power: &[f64]) -> Option<f64> {
    let (imax, &pmax) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let level = dsp::db(pmax) - 10.0 * 2f64.log10();
    let db_at = |i: usize| dsp::db(power[i]);
    let cross = |i_in: usize, i_out: usize| {
        let (a, b) = (db_at(i_in), db_at(i_out));
        let t = (a - level) / (a - b);
        angles[i_in].degrees() + t * (angles[i_out].degrees() - angles[i_in].degrees())
    };
    let mut r = imax;
    while r + 1 < power.len() && db_at(r + 1) >= level {
        r += 1;
    }
    let mut l = imax;
    while l > 0 && db_at(l - 1) >= level {
        l -= 1;
    }
    if r + 1 >= power.len() || l == 0 {
        return None;
    }
    Some(cross(r, r + 1) - cross(l, l - 1))
}

/// Ratio of the maximum to the median, in dB.
pub fn max_to_median_db(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    };
    dsp::db(v[n - 1] / median)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::RngSeed;
    use crate::waveform::{design_rrc, generate_symbols, pulse_shape_periodic};

    const FC: f64 = 28e9;

    fn tone_frame(m: usize, bin: usize, n: usize, fs: f64) -> PrecodedFrame {
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (bin * i) as f64 / n as f64))
            .collect();
        PrecodedFrame::from_signals(vec![SampledSignal::new(x, fs); m]).unwrap()
    }

    #[test]
    fn single_antenna_passes_through() {
        let g = UlaGeometry::half_wavelength(1, FC).unwrap();
        let shape = design_rrc(0.22, 8, 4).unwrap();
        let s = pulse_shape_periodic(&generate_symbols(1, 64, RngSeed(1))[0], &shape, 1e6);
        let f = PrecodedFrame::from_signals(vec![s.clone()]).unwrap();
        let r = far_field_signal(&f, &g, Direction(0.4));
        for (a, b) in r.samples.iter().zip(&s.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_broadside_sum() {
        let g = UlaGeometry::half_wavelength(6, FC).unwrap();
        let f = tone_frame(6, 3, 64, 64e6);
        let r = far_field_signal(&f, &g, Direction::BROADSIDE);
        assert!((r.power() - 36.0).abs() < 1e-9);
    }

    #[test]
    fn endfire_pair_cancels_at_carrier() {
        let g = UlaGeometry::half_wavelength(2, FC).unwrap();
        let f = tone_frame(2, 0, 32, 32e6);
        let r = far_field_signal(&f, &g, Direction(PI / 2.0));
        assert!(r.power() < 1e-20);
    }

    #[test]
    fn beampattern_matches_far_field_signal() {
        let g = UlaGeometry::half_wavelength(5, FC).unwrap();
        let shape = design_rrc(0.22, 8, 7).unwrap();
        let sigs: Vec<_> = generate_symbols(5, 128, RngSeed(2))
            .iter()
            .map(|s| pulse_shape_periodic(s, &shape, 20e6))
            .collect();
        let f = PrecodedFrame::from_signals(sigs).unwrap();
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let grid = [Direction(-0.9), Direction(0.1), Direction(1.2)];
        let bp = beampattern(&f, &g, &grid, &bands).unwrap();
        for (i, d) in grid.iter().enumerate() {
            let r = far_field_signal(&f, &g, *d);
            let p = super::super::dft_band_powers(&dsp::fft(&r.samples), r.sample_rate, &bands).unwrap();
            assert!((bp.inband_power[i] / p.allocated - 1.0).abs() < 1e-9);
            assert!((bp.oob_power[i] / p.oob() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn beamwidth_of_a_sampled_lobe() {
        let angles: Vec<Direction> = (0..201).map(|i| Direction::from_degrees(-10.0 + 0.1 * i as f64)).collect();
        // Gaussian lobe with 3 dB width of 2 degrees
        let sigma2 = 1.0 / (2.0 * 2f64.ln());
        let p: Vec<f64> = angles.iter().map(|a| (-(a.degrees().powi(2)) / (2.0 * sigma2)).exp()).collect();
        let bw = half_power_beamwidth_deg(&angles, &p).unwrap();
        assert!((bw - 2.0).abs() < 0.01, "{bw}");
    }

    #[test]
    fn spread_of_flat_pattern_is_zero() {
        assert_eq!(max_to_median_db(&[2.0; 7]), 0.0);
        assert!((max_to_median_db(&[1.0, 1.0, 10.0]) - 10.0).abs() < 1e-12);
    }
}
