//! Uniform linear array geometry and wideband steering.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform linear array along one axis with isotropic elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    pub num_antennas: usize,
    pub spacing_wavelengths: f64,
    pub carrier_frequency: f64,
}

impl UlaGeometry {
    pub fn new(num_antennas: usize, spacing_wavelengths: f64, carrier_frequency: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::invalid("num_antennas", "must be at least 1"));
        }
        if !(spacing_wavelengths > 0.0 && spacing_wavelengths.is_finite()) {
            return Err(Error::invalid("spacing_wavelengths", "must be positive"));
        }
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(Error::invalid("carrier_frequency", "must be positive"));
        }
        Ok(UlaGeometry {
            num_antennas,
            spacing_wavelengths,
            carrier_frequency,
        })
    }

    /// Half-wavelength array.
    pub fn half_wavelength(num_antennas: usize, carrier_frequency: f64) -> Result<Self> {
        Self::new(num_antennas, 0.5, carrier_frequency)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Physical element spacing in meters.
    pub fn spacing(&self) -> f64 {
        self.spacing_wavelengths * self.wavelength()
    }

    pub fn element_position(&self, m: usize) -> f64 {
        m as f64 * self.spacing()
    }
}

/// Angle from broadside in radians, positive toward increasing element index.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Direction(pub f64);

impl Direction {
    pub const BROADSIDE: Direction = Direction(0.0);

    pub fn from_degrees(deg: f64) -> Self {
        Direction(deg.to_radians())
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Far-field delay of each element relative to element 0.
pub fn element_delays(geometry: &UlaGeometry, direction: Direction) -> Vec<f64> {
    let step = geometry.spacing() * direction.0.sin() / SPEED_OF_LIGHT;
    (0..geometry.num_antennas).map(|m| m as f64 * step).collect()
}

/// `exp(-j 2π f τ_m)` at the absolute (RF) frequency `f`.
pub fn steering_phases(geometry: &UlaGeometry, direction: Direction, absolute_frequency: f64) -> Vec<Complex64> {
    element_delays(geometry, direction)
        .into_iter()
        .map(|tau| Complex64::from_polar(1.0, -2.0 * PI * absolute_frequency * tau))
        .collect()
}

/// Delay increment between neighbouring elements toward `direction`.
pub(crate) fn delay_step(geometry: &UlaGeometry, direction: Direction) -> f64 {
    geometry.spacing() * direction.0.sin() / SPEED_OF_LIGHT
}

/// Evenly spaced angle grid in degrees, inclusive of both ends.
pub fn angle_grid_degrees(min_deg: f64, max_deg: f64, step_deg: f64) -> Vec<Direction> {
    let n = ((max_deg - min_deg) / step_deg + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|i| Direction::from_degrees(min_deg + i as f64 * step_deg))
        .collect()
}
