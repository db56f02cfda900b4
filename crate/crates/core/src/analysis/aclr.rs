use super::bands::{BandBins, BandPowers, BandSpec};
use crate::dsp;
use crate::error::{Error, Result};
use crate::precode::PrecodedFrame;
use rayon::prelude::*;

/// Band powers summed over all antennas of a frame.
pub fn conducted_band_powers(frame: &PrecodedFrame, bands: &BandSpec) -> Result<BandPowers> {
    if frame.is_empty() {
        return Err(Error::SignalTooShort { required: 1, actual: 0 });
    }
    let bins = BandBins::new(frame.len(), frame.sample_rate(), bands)?;
    let per: Vec<BandPowers> = frame
        .per_antenna
        .par_iter()
        .map(|s| bins.powers(&dsp::fft(&s.samples)))
        .collect();
    let mut total = BandPowers::default();
    for p in &per {
        total.add(p);
    }
    Ok(total)
}

/// Allocated-band power over the strongest adjacent band, each summed over
/// antennas, in dB.
pub fn conducted_aclr(frame: &PrecodedFrame, bands: &BandSpec) -> Result<f64> {
    conducted_band_powers(frame, bands)?.aclr_db()
}

/// Over-the-air ratio of a served user's in-band power to a victim's OOB
/// power, in dB.
pub fn array_aclr(inband_at_served_user: f64, oob_at_reference_victim: f64) -> Result<f64> {
    if !(inband_at_served_user > 0.0) || !(oob_at_reference_victim > 0.0) {
        return Err(Error::invalid("power", "array ACLR needs positive powers"));
    }
    Ok(dsp::db(inband_at_served_user / oob_at_reference_victim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::RngSeed;
    use crate::waveform::{design_rrc, generate_symbols, pulse_shape_periodic};

    #[test]
    fn identical_antennas_share_single_antenna_aclr() {
        let shape = design_rrc(0.22, 32, 7).unwrap();
        let s = pulse_shape_periodic(&generate_symbols(1, 4096, RngSeed(1))[0], &shape, 1.0);
        let y = crate::frontend::apply_nonlinearity(
            &s,
            &crate::frontend::NonlinearityModel::from_ratio(num_complex::Complex64::new(-0.05, 0.0), 0.8).unwrap(),
        );
        let bands = BandSpec::for_pulse(1.0, 0.22).unwrap();
        let one = conducted_aclr(&PrecodedFrame::from_signals(vec![y.clone()]).unwrap(), &bands).unwrap();
        let many = conducted_aclr(&PrecodedFrame::from_signals(vec![y; 5]).unwrap(), &bands).unwrap();
        assert!((one - many).abs() < 1e-9);
    }

    #[test]
    fn array_aclr_examples() {
        assert_eq!(array_aclr(2.0, 2.0).unwrap(), 0.0);
        assert!((array_aclr(100.0, 1.0).unwrap() - 20.0).abs() < 1e-12);
        assert!(array_aclr(0.0, 1.0).is_err());
        assert!(array_aclr(1.0, -1.0).is_err());
    }
}
