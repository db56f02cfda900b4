use super::ChannelResponse;
use crate::error::{Error, Result};
use crate::geometry::{delay_step, Direction, UlaGeometry};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Pure-delay plane-wave channel to `K` far-field users.
#[derive(Debug, Clone, PartialEq)]
pub struct LosChannel {
    pub geometry: UlaGeometry,
    pub user_angles: Vec<Direction>,
    pub path_gains: Vec<f64>,
}

pub fn make_los(geometry: UlaGeometry, angles: Vec<Direction>, gains: Vec<f64>) -> Result<LosChannel> {
    if angles.is_empty() {
        return Err(Error::invalid("user_angles", "at least one user is required"));
    }
    if angles.len() != gains.len() {
        return Err(Error::LengthMismatch {
            what: "path gains per user",
            expected: angles.len(),
            actual: gains.len(),
        });
    }
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::invalid("path_gains", "gains must be finite and nonnegative"));
    }
    Ok(LosChannel {
        geometry,
        user_angles: angles,
        path_gains: gains,
    })
}

impl ChannelResponse for LosChannel {
    fn num_antennas(&self) -> usize {
        self.geometry.num_antennas
    }

    fn num_users(&self) -> usize {
        self.user_angles.len()
    }

    fn response(&self, user: usize, freq: f64) -> Vec<Complex64> {
        let step = delay_step(&self.geometry, self.user_angles[user]);
        let w = -2.0 * PI * (self.geometry.carrier_frequency + freq) * step;
        let b = self.path_gains[user];
        (0..self.geometry.num_antennas)
            .map(|m| Complex64::from_polar(b, w * m as f64))
            .collect()
    }

    fn user_energy(&self, user: usize, _n: usize, _sample_rate: f64) -> f64 {
        let b = self.path_gains[user];
        b * b * self.geometry.num_antennas as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(m: usize) -> UlaGeometry {
        UlaGeometry::half_wavelength(m, 28e9).unwrap()
    }

    #[test]
    fn broadside_unit_gain_is_all_ones() {
        let ch = make_los(geom(8), vec![Direction::BROADSIDE], vec![1.0]).unwrap();
        for f in [-30e6, 0.0, 12.5e6] {
            assert!(ch
                .response(0, f)
                .iter()
                .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn zero_gain_user_is_silent() {
        let ch = make_los(geom(4), vec![Direction(0.2), Direction(-0.4)], vec![1.0, 0.0]).unwrap();
        assert!(ch.response(1, 3e6).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn mirrored_users_are_conjugate_at_carrier() {
        let ch = make_los(geom(6), vec![Direction(0.3), Direction(-0.3)], vec![1.0, 1.0]).unwrap();
        let a = ch.response(0, 0.0);
        let b = ch.response(1, 0.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y.conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn magnitude_is_flat_in_frequency() {
        let ch = make_los(geom(5), vec![Direction(0.7)], vec![0.3]).unwrap();
        for f in [-60e6, -1e6, 0.0, 44e6] {
            assert!(ch.response(0, f).iter().all(|v| (v.norm() - 0.3).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_mismatch() {
        assert!(make_los(geom(4), vec![Direction(0.1)], vec![1.0, 2.0]).is_err());
        assert!(make_los(geom(4), vec![], vec![]).is_err());
    }
}
