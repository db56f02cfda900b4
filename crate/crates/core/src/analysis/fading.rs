use super::bands::{BandBins, BandPowers, BandSpec};
use crate::channel::{ChannelResponse, TapChannel};
use crate::dsp;
use crate::error::{Error, Result};
use crate::precode::PrecodedFrame;
use crate::waveform::SampledSignal;
use num_complex::Complex64;

fn check_antennas(frame: &PrecodedFrame, channel: &dyn ChannelResponse) -> Result<()> {
    if channel.num_antennas() != frame.num_antennas() {
        return Err(Error::LengthMismatch {
            what: "channel antennas",
            expected: frame.num_antennas(),
            actual: channel.num_antennas(),
        });
    }
    Ok(())
}

/// Signal seen by receiver `user` of `channel`: `Σ_m h[m][user] ⊛ x_m`,
/// circular over the frame period.
pub fn received_signal(frame: &PrecodedFrame, channel: &dyn ChannelResponse, user: usize) -> Result<SampledSignal> {
    check_antennas(frame, channel)?;
    let n = frame.len();
    let fs = frame.sample_rate();
    let h = channel.grid_response(user, n, fs);
    let spectra = frame.spectra();
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for (hm, ym) in h.iter().zip(&spectra) {
        for ((a, x), y) in r.iter_mut().zip(hm).zip(ym) {
            *a += x * y;
        }
    }
    dsp::ifft_in_place(&mut r);
    Ok(SampledSignal::new(r, fs))
}

/// In-band and adjacent-band powers received through a victim channel
/// (user 0 of `channel_to_victim`).
pub fn fading_received_power(
    frame: &PrecodedFrame,
    channel_to_victim: &TapChannel,
    bands: &BandSpec,
) -> Result<BandPowers> {
    check_antennas(frame, channel_to_victim)?;
    let n = frame.len();
    let fs = frame.sample_rate();
    let bins = BandBins::new(n, fs, bands)?;
    let h = channel_to_victim.grid_response(0, n, fs);
    let spectra = frame.spectra();
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for (hm, ym) in h.iter().zip(&spectra) {
        for ((a, x), y) in r.iter_mut().zip(hm).zip(ym) {
            *a += x * y;
        }
    }
    Ok(bins.powers(&r))
}

/// Repeated victim-power evaluation against one transmitted frame.
///
/// Holds the frame spectrum restricted to the measured bands. When the tap
/// spacing is an integer number of samples dividing the frame length, the
/// channel response is periodic across bins and only a short DFT of the
/// taps is needed per draw.
#[derive(Debug, Clone)]
pub struct VictimEvaluator {
    bins: BandBins,
    order: Vec<usize>,
    /// `[bin][m]` over `order`.
    yt: Vec<Vec<Complex64>>,
    num_antennas: usize,
}

impl VictimEvaluator {
    pub fn new(frame: &PrecodedFrame, bands: &BandSpec) -> Result<Self> {
        let spectra = frame.spectra();
        Self::from_spectra(&spectra, frame.sample_rate(), bands)
    }

    /// Builds the evaluator from per-antenna spectra `[m][bin]`.
    pub fn from_spectra(spectra: &[Vec<Complex64>], sample_rate: f64, bands: &BandSpec) -> Result<Self> {
        let n = spectra[0].len();
        let bins = BandBins::new(n, sample_rate, bands)?;
        let order = bins.all();
        let yt = order
            .iter()
            .map(|&k| spectra.iter().map(|s| s[k]).collect())
            .collect();
        Ok(VictimEvaluator {
            bins,
            order,
            yt,
            num_antennas: spectra.len(),
        })
    }

    /// Band powers received by `user` of `channel`.
    pub fn evaluate(&self, channel: &TapChannel, user: usize) -> Result<BandPowers> {
        if channel.num_antennas() != self.num_antennas {
            return Err(Error::LengthMismatch {
                what: "channel antennas",
                expected: self.num_antennas,
                actual: channel.num_antennas(),
            });
        }
        let n = self.bins.n;
        let s = channel.tap_spacing * self.bins.sample_rate;
        let spt = s.round();
        let mags: Vec<f64> = if (s - spt).abs() < 1e-9 * s.max(1.0) && spt >= 1.0 && n % spt as usize == 0 {
            let period = n / spt as usize;
            let hp = channel.periodic_response(user, period);
            // [bin mod period][m]
            let ht: Vec<Vec<Complex64>> = (0..period).map(|k| hp.iter().map(|h| h[k]).collect()).collect();
            self.order
                .iter()
                .zip(&self.yt)
                .map(|(&k, y)| {
                    let h = &ht[k % period];
                    h.iter().zip(y).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr()
                })
                .collect()
        } else {
            let h = channel.grid_response(user, n, self.bins.sample_rate);
            self.order
                .iter()
                .zip(&self.yt)
                .map(|(&k, y)| {
                    y.iter()
                        .enumerate()
                        .map(|(m, v)| h[m][k] * v)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .collect()
        };
        Ok(self.bins.powers_from_ordered(&mags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::conducted_band_powers;
    use crate::channel::sample_rayleigh;
    use crate::seed::RngSeed;
    use crate::waveform::{design_rrc, generate_symbols, pulse_shape_periodic};

    fn frame(m: usize, n_sym: usize, seed: u64) -> PrecodedFrame {
        let shape = design_rrc(0.22, 16, 7).unwrap();
        let sigs = generate_symbols(m, n_sym, RngSeed(seed))
            .iter()
            .map(|s| pulse_shape_periodic(s, &shape, 20e6))
            .collect();
        PrecodedFrame::from_signals(sigs).unwrap()
    }

    #[test]
    fn unit_tap_single_antenna_is_transparent() {
        let f = frame(1, 256, 1);
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let ch = TapChannel::from_taps(vec![vec![vec![Complex64::new(1.0, 0.0)]]], 1.0 / 20e6).unwrap();
        let got = fading_received_power(&f, &ch, &bands).unwrap();
        let want = conducted_band_powers(&f, &bands).unwrap();
        assert!((got.allocated / want.allocated - 1.0).abs() < 1e-12);
        assert!((got.upper / want.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_channel_receives_nothing() {
        let f = frame(3, 64, 2);
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let zero = vec![vec![vec![Complex64::new(0.0, 0.0); 4]]; 3];
        let ch = TapChannel::from_taps(zero, 1.0 / 20e6).unwrap();
        let p = fading_received_power(&f, &ch, &bands).unwrap();
        assert_eq!((p.allocated, p.oob()), (0.0, 0.0));
    }

    #[test]
    fn evaluator_matches_direct_computation() {
        let f = frame(4, 128, 3);
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let ev = VictimEvaluator::new(&f, &bands).unwrap();
        for i in 0..5 {
            let ch = sample_rayleigh(4, 1, 15, 1.0 / 20e6, RngSeed(9).child("v", i)).unwrap();
            let a = ev.evaluate(&ch, 0).unwrap();
            let b = fading_received_power(&f, &ch, &bands).unwrap();
            assert!((a.allocated / b.allocated - 1.0).abs() < 1e-9);
            assert!((a.lower / b.lower - 1.0).abs() < 1e-9);
            assert!((a.upper / b.upper - 1.0).abs() < 1e-9);
        }
        // off-grid spacing takes the generic path
        let ch = sample_rayleigh(4, 1, 3, 1.3e-8, RngSeed(2)).unwrap();
        let a = ev.evaluate(&ch, 0).unwrap();
        let b = fading_received_power(&f, &ch, &bands).unwrap();
        assert!((a.allocated / b.allocated - 1.0).abs() < 1e-9);
    }

    #[test]
    fn received_signal_band_powers_agree() {
        let f = frame(2, 128, 4);
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let ch = sample_rayleigh(2, 1, 5, 1.0 / 20e6, RngSeed(3)).unwrap();
        let r = received_signal(&f, &ch, 0).unwrap();
        let p = crate::analysis::dft_band_powers(&dsp::fft(&r.samples), r.sample_rate, &bands).unwrap();
        let q = fading_received_power(&f, &ch, &bands).unwrap();
        assert!((p.allocated / q.allocated - 1.0).abs() < 1e-9);
    }

    #[test]
    fn antenna_mismatch_is_rejected() {
        let f = frame(2, 32, 5);
        let bands = BandSpec::for_pulse(20e6, 0.22).unwrap();
        let ch = sample_rayleigh(3, 1, 2, 1.0 / 20e6, RngSeed(3)).unwrap();
        assert!(fading_received_power(&f, &ch, &bands).is_err());
    }
}
