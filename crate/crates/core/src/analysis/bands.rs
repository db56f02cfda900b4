use crate::dsp;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Allocated band `[-W/2, W/2]` and its two adjacent bands of equal width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Allocated,
    Lower,
    Upper,
}

impl BandSpec {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("channel_bandwidth", "must be positive"));
        }
        Ok(BandSpec { width })
    }

    /// `W = baud · (1 + rolloff)`, the band holding the whole shaped signal.
    pub fn for_pulse(baud_rate: f64, rolloff: f64) -> Result<Self> {
        BandSpec::new(baud_rate * (1.0 + rolloff))
    }

    pub fn allocated(&self) -> (f64, f64) {
        (-self.width / 2.0, self.width / 2.0)
    }

    pub fn adjacent_lower(&self) -> (f64, f64) {
        (-1.5 * self.width, -self.width / 2.0)
    }

    pub fn adjacent_upper(&self) -> (f64, f64) {
        (self.width / 2.0, 1.5 * self.width)
    }

    /// Band containing baseband frequency `f`. Shared edges belong to the
    /// allocated band.
    pub fn classify(&self, f: f64) -> Option<Band> {
        let h = self.width / 2.0;
        if f.abs() <= h {
            Some(Band::Allocated)
        } else if f > h && f <= 3.0 * h {
            Some(Band::Upper)
        } else if f < -h && f >= -3.0 * h {
            Some(Band::Lower)
        } else {
            None
        }
    }
}

/// Powers in the allocated and adjacent bands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandPowers {
    pub allocated: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BandPowers {
    /// Strongest adjacent band.
    pub fn oob(&self) -> f64 {
        self.lower.max(self.upper)
    }

    pub fn add(&mut self, other: &BandPowers) {
        self.allocated += other.allocated;
        self.lower += other.lower;
        self.upper += other.upper;
    }

    pub fn scaled(&self, s: f64) -> BandPowers {
        BandPowers {
            allocated: self.allocated * s,
            lower: self.lower * s,
            upper: self.upper * s,
        }
    }

    pub fn aclr_db(&self) -> Result<f64> {
        let oob = self.oob();
        if !(oob > 0.0) {
            return Err(Error::ZeroAdjacentPower);
        }
        Ok(dsp::db(self.allocated / oob))
    }
}

/// DFT bins of an `n`-point grid grouped by band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandBins {
    pub n: usize,
    pub sample_rate: f64,
    pub allocated: Vec<usize>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl BandBins {
    pub fn new(n: usize, sample_rate: f64, bands: &BandSpec) -> Result<Self> {
        if 3.0 * bands.width / 2.0 > sample_rate / 2.0 {
            return Err(Error::BandOutOfRange {
                low: -1.5 * bands.width,
                high: 1.5 * bands.width,
                span_low: -sample_rate / 2.0,
                span_high: sample_rate / 2.0,
            });
        }
        let mut out = BandBins {
            n,
            sample_rate,
            allocated: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        };
        for k in 0..n {
            match bands.classify(dsp::bin_frequency(k, n, sample_rate)) {
                Some(Band::Allocated) => out.allocated.push(k),
                Some(Band::Lower) => out.lower.push(k),
                Some(Band::Upper) => out.upper.push(k),
                None => {}
            }
        }
        Ok(out)
    }

    /// All bins in any band, in the order allocated, lower, upper.
    pub fn all(&self) -> Vec<usize> {
        let mut v = self.allocated.clone();
        v.extend(&self.lower);
        v.extend(&self.upper);
        v
    }

    /// Band powers from per-bin squared magnitudes laid out as `all()`.
    pub fn powers_from_ordered(&self, mags: &[f64]) -> BandPowers {
        let a = self.allocated.len();
        let l = self.lower.len();
        let norm = 1.0 / (self.n as f64 * self.n as f64);
        BandPowers {
            allocated: mags[..a].iter().sum::<f64>() * norm,
            lower: mags[a..a + l].iter().sum::<f64>() * norm,
            upper: mags[a + l..].iter().sum::<f64>() * norm,
        }
    }

    pub fn powers(&self, spectrum: &[Complex64]) -> BandPowers {
        let sum = |idx: &[usize]| idx.iter().map(|&k| spectrum[k].norm_sqr()).sum::<f64>();
        let norm = 1.0 / (self.n as f64 * self.n as f64);
        BandPowers {
            allocated: sum(&self.allocated) * norm,
            lower: sum(&self.lower) * norm,
            upper: sum(&self.upper) * norm,
        }
    }
}

/// Band powers of a periodic signal from its unnormalized DFT.
pub fn dft_band_powers(spectrum: &[Complex64], sample_rate: f64, bands: &BandSpec) -> Result<BandPowers> {
    Ok(BandBins::new(spectrum.len(), sample_rate, bands)?.powers(spectrum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_are_contiguous_and_equal() {
        let b = BandSpec::for_pulse(20e6, 0.22).unwrap();
        assert!((b.width - 24.4e6).abs() < 1e-3);
        assert_eq!(b.adjacent_lower().1, b.allocated().0);
        assert_eq!(b.allocated().1, b.adjacent_upper().0);
        let w = |r: (f64, f64)| r.1 - r.0;
        assert!((w(b.adjacent_lower()) - w(b.allocated())).abs() < 1e-6);
        assert!((w(b.adjacent_upper()) - w(b.allocated())).abs() < 1e-6);
    }

    #[test]
    fn tone_lands_in_its_band() {
        let n = 700;
        let fs = 140.0;
        let b = BandSpec::new(24.4).unwrap();
        for (bin, want) in [(10usize, Band::Allocated), (100, Band::Upper), (600, Band::Lower)] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (bin * i) as f64 / n as f64))
                .collect();
            let p = dft_band_powers(&dsp::fft(&x), fs, &b).unwrap();
            let got = match want {
                Band::Allocated => p.allocated,
                Band::Lower => p.lower,
                Band::Upper => p.upper,
            };
            assert!((got - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bands_beyond_nyquist() {
        let b = BandSpec::new(50.0).unwrap();
        assert!(BandBins::new(64, 100.0, &b).is_err());
    }

    #[test]
    fn zero_adjacent_power_is_an_error() {
        let p = BandPowers {
            allocated: 1.0,
            lower: 0.0,
            upper: 0.0,
        };
        assert!(matches!(p.aclr_db(), Err(Error::ZeroAdjacentPower)));
    }
}
