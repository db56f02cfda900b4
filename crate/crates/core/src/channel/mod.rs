//! Propagation models: plane-wave line of sight, i.i.d. Rayleigh taps and a
//! single-bounce scatterer map.

mod los;
mod rayleigh;
mod scatter;

pub use los::{make_los, LosChannel};
pub use rayleigh::{sample_rayleigh, sample_rayleigh_with, PowerDelayProfile, TapChannel};
pub use scatter::{sample_scatter_map, Point, RayChannel, RayUsersChannel, Region, ScatterMap};

use crate::dsp;
use num_complex::Complex64;

/// Baseband frequency response of a multi-user downlink channel.
///
/// `response(user, f)` returns `H_{m,user}(f)` for all antennas `m` at the
/// baseband frequency `f` (Hz, relative to the carrier).
pub trait ChannelResponse: Sync {
    fn num_antennas(&self) -> usize;
    fn num_users(&self) -> usize;
    fn response(&self, user: usize, freq: f64) -> Vec<Complex64>;

    /// Response on the `n`-point DFT grid at `sample_rate`, indexed `[m][bin]`.
    fn grid_response(&self, user: usize, n: usize, sample_rate: f64) -> Vec<Vec<Complex64>> {
        let m_count = self.num_antennas();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; m_count];
        for k in 0..n {
            let h = self.response(user, dsp::bin_frequency(k, n, sample_rate));
            for (m, v) in h.into_iter().enumerate() {
                out[m][k] = v;
            }
        }
        out
    }

    /// Extra delay (seconds) the matched filter needs to be causal.
    fn matched_filter_delay(&self) -> f64 {
        0.0
    }

    /// Channel energy `Σ_m ∫|H_{m,user}|²` averaged over the band, used to
    /// normalize matched filters.
    fn user_energy(&self, user: usize, n: usize, sample_rate: f64) -> f64 {
        let g = self.grid_response(user, n, sample_rate);
        g.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() / n as f64
    }
}
