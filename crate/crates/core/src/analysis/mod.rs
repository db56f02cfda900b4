//! Spectral estimation, band powers, ACLR, wideband beampatterns, victim
//! power under fading and CCDF statistics.
//!
//! Frames are treated as one period of a periodic signal, so band powers
//! taken from the full-frame DFT are exact and carry no window leakage.

mod aclr;
mod bands;
mod ccdf;
mod fading;
mod pattern;
mod psd;

pub use aclr::{array_aclr, conducted_aclr, conducted_band_powers};
pub use bands::{dft_band_powers, Band, BandBins, BandPowers, BandSpec};
pub use ccdf::{empirical_ccdf, mean_db, percentile, std_db, threshold_grid, CcdfCurve};
pub use fading::{fading_received_power, received_signal, VictimEvaluator};
pub use pattern::{
    beampattern, far_field_signal, half_power_beamwidth_deg, max_to_median_db, Beampattern,
};
pub use psd::{band_power, estimate_psd, PsdEstimate};
