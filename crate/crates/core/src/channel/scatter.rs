use super::ChannelResponse;
use crate::error::{Error, Result};
use crate::geometry::{UlaGeometry, SPEED_OF_LIGHT};
use crate::seed::RngSeed;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    /// Square of side `size` whose center lies `east` meters along +x.
    pub fn square_east(east: f64, size: f64) -> Self {
        Region {
            x_min: east - size / 2.0,
            x_max: east + size / 2.0,
            y_min: -size / 2.0,
            y_max: size / 2.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x_max > self.x_min && self.y_max > self.y_min)
            || ![self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
    }

    /// Node `(i, j)` of an `n × n` grid spanning the region, inclusive of edges.
    pub fn grid_point(&self, i: usize, j: usize, n: usize) -> Point {
        let t = |k: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
        Point::new(
            self.x_min + t(i) * (self.x_max - self.x_min),
            self.y_min + t(j) * (self.y_max - self.y_min),
        )
    }

    /// Grid indices of the node closest to `p`.
    pub fn nearest_node(&self, p: &Point, n: usize) -> (usize, usize) {
        let idx = |v: f64, lo: f64, hi: f64| {
            if n <= 1 {
                0
            } else {
                (((v - lo) / (hi - lo)) * (n - 1) as f64).round().clamp(0.0, (n - 1) as f64) as usize
            }
        };
        (idx(p.x, self.x_min, self.x_max), idx(p.y, self.y_min, self.y_max))
    }
}

/// Scatterer layout around an array whose element `m` sits at
/// `bs_position + (0, m·d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMap {
    pub geometry: UlaGeometry,
    pub bs_position: Point,
    pub region: Region,
    pub scatterers: Vec<Point>,
    pub users: Vec<Point>,
    pub reflection: f64,
}

/// Single-bounce rays from each antenna to one terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct RayChannel {
    pub carrier_frequency: f64,
    pub terminal: Point,
    num_antennas: usize,
    num_scatterers: usize,
    /// `[m][s]` amplitude `g_s / (d1 · d2)`.
    gains: Vec<f64>,
    /// `[m][s]` total path delay in seconds.
    delays: Vec<f64>,
}

impl RayChannel {
    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn ray(&self, m: usize, s: usize) -> (f64, f64) {
        let i = m * self.num_scatterers + s;
        (self.gains[i], self.delays[i])
    }

    /// Per-antenna response at baseband frequency `freq`.
    pub fn response(&self, freq: f64) -> Vec<Complex64> {
        let w = -2.0 * PI * (self.carrier_frequency + freq);
        (0..self.num_antennas)
            .map(|m| {
                (0..self.num_scatterers)
                    .map(|s| {
                        let (g, d) = self.ray(m, s);
                        Complex64::from_polar(g, w * d)
                    })
                    .sum()
            })
            .collect()
    }
}

impl ScatterMap {
    pub fn element_position(&self, m: usize) -> Point {
        Point::new(self.bs_position.x, self.bs_position.y + self.geometry.element_position(m))
    }

    /// Distance from antenna `m` to scatterer `s`.
    pub fn leg_distance(&self, m: usize, s: usize) -> f64 {
        self.element_position(m).distance(&self.scatterers[s])
    }

    pub fn channel_at(&self, terminal: Point) -> Result<RayChannel> {
        let m_count = self.geometry.num_antennas;
        let s_count = self.scatterers.len();
        let mut d2 = Vec::with_capacity(s_count);
        for (s, sc) in self.scatterers.iter().enumerate() {
            let d = sc.distance(&terminal);
            if d < 1e-6 {
                return Err(Error::CoincidentTerminal {
                    x: terminal.x,
                    y: terminal.y,
                    scatterer: s,
                });
            }
            d2.push(d);
        }
        let mut gains = Vec::with_capacity(m_count * s_count);
        let mut delays = Vec::with_capacity(m_count * s_count);
        for m in 0..m_count {
            for (s, &b) in d2.iter().enumerate() {
                let a = self.leg_distance(m, s);
                gains.push(self.reflection / (a * b));
                delays.push((a + b) / SPEED_OF_LIGHT);
            }
        }
        Ok(RayChannel {
            carrier_frequency: self.geometry.carrier_frequency,
            terminal,
            num_antennas: m_count,
            num_scatterers: s_count,
            gains,
            delays,
        })
    }

    /// Multi-user channel to the placed users.
    pub fn users_channel(&self) -> Result<RayUsersChannel> {
        let users = self
            .users
            .iter()
            .map(|p| self.channel_at(*p))
            .collect::<Result<Vec<_>>>()?;
        Ok(RayUsersChannel { users })
    }
}

/// Downlink channel to several terminals of one scatterer map.
#[derive(Debug, Clone, PartialEq)]
pub struct RayUsersChannel {
    pub users: Vec<RayChannel>,
}

impl ChannelResponse for RayUsersChannel {
    fn num_antennas(&self) -> usize {
        self.users.first().map_or(0, |u| u.num_antennas)
    }

    fn num_users(&self) -> usize {
        self.users.len()
    }

    fn response(&self, user: usize, freq: f64) -> Vec<Complex64> {
        self.users[user].response(freq)
    }
}

/// Places `num_scatterers` scatterers and `user_count` users uniformly in
/// `region`; the array sits at the origin.
pub fn sample_scatter_map(
    geometry: UlaGeometry,
    num_scatterers: usize,
    region: Region,
    user_count: usize,
    seed: RngSeed,
) -> Result<ScatterMap> {
    if num_scatterers == 0 {
        return Err(Error::invalid("num_scatterers", "must be at least 1"));
    }
    if region.is_degenerate() {
        return Err(Error::invalid("region", "must have positive width and height"));
    }
    let draw = |label: &str, count: usize| -> Vec<Point> {
        let mut rng = seed.child(label, 0).rng();
        (0..count)
            .map(|_| {
                Point::new(
                    rng.random_range(region.x_min..region.x_max),
                    rng.random_range(region.y_min..region.y_max),
                )
            })
            .collect()
    };
    Ok(ScatterMap {
        geometry,
        bs_position: Point::new(0.0, 0.0),
        region,
        scatterers: draw("scatterers", num_scatterers),
        users: draw("users", user_count),
        reflection: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(scatterers: Vec<Point>) -> ScatterMap {
        ScatterMap {
            geometry: UlaGeometry::half_wavelength(2, 3e9).unwrap(),
            bs_position: Point::new(0.0, 0.0),
            region: Region::square_east(250.0, 100.0),
            scatterers,
            users: vec![],
            reflection: 1.0,
        }
    }

    #[test]
    fn equidistant_scatterer_gives_equal_magnitudes() {
        let map = layout(vec![]);
        let mid = map.geometry.spacing() / 2.0;
        let map = layout(vec![Point::new(40.0, mid)]);
        let ch = map.channel_at(Point::new(80.0, 10.0)).unwrap();
        assert!((ch.ray(0, 0).0 - ch.ray(1, 0).0).abs() < 1e-15);
    }

    #[test]
    fn doubling_distances_quarters_amplitude() {
        let map = layout(vec![Point::new(30.0, 20.0)]);
        let ch = map.channel_at(Point::new(50.0, -10.0)).unwrap();
        let mut far = layout(vec![Point::new(60.0, 40.0)]);
        far.geometry.spacing_wavelengths *= 2.0;
        let ch2 = far.channel_at(Point::new(100.0, -20.0)).unwrap();
        for m in 0..2 {
            assert!((ch2.ray(m, 0).0 / ch.ray(m, 0).0 - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn half_wavelength_step_flips_phase() {
        let map = layout(vec![Point::new(100.0, 0.0)]);
        let lambda = map.geometry.wavelength();
        let a = map.channel_at(Point::new(150.0, 0.0)).unwrap().response(0.0);
        let b = map.channel_at(Point::new(150.0 + lambda / 2.0, 0.0)).unwrap().response(0.0);
        let dphi = (b[0] / a[0]).arg().abs();
        assert!((dphi - PI).abs() < 1e-3, "{dphi}");
    }

    #[test]
    fn coincident_terminal_is_rejected() {
        let map = layout(vec![Point::new(30.0, 20.0)]);
        assert!(matches!(
            map.channel_at(Point::new(30.0, 20.0)),
            Err(Error::CoincidentTerminal { .. })
        ));
    }

    #[test]
    fn relabeling_scatterers_keeps_power() {
        let pts = vec![Point::new(210.0, 3.0), Point::new(260.0, -30.0), Point::new(290.0, 44.0)];
        let mut rev = pts.clone();
        rev.reverse();
        let t = Point::new(240.0, 5.0);
        let a = layout(pts).channel_at(t).unwrap().response(1e6);
        let b = layout(rev).channel_at(t).unwrap().response(1e6);
        for (x, y) in a.iter().zip(&b) {
            assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12 * x.norm_sqr().max(1e-30));
        }
    }

    #[test]
    fn layout_is_seeded_and_inside_region() {
        let g = UlaGeometry::half_wavelength(100, 3e9).unwrap();
        let r = Region::square_east(250.0, 100.0);
        let a = sample_scatter_map(g, 20, r, 3, RngSeed(12)).unwrap();
        let b = sample_scatter_map(g, 20, r, 3, RngSeed(12)).unwrap();
        assert_eq!(a, b);
        for p in a.scatterers.iter().chain(&a.users) {
            assert!(p.x >= 200.0 && p.x < 300.0 && p.y >= -50.0 && p.y < 50.0);
        }
        assert!(sample_scatter_map(g, 0, r, 3, RngSeed(1)).is_err());
        assert!(sample_scatter_map(g, 3, Region::square_east(0.0, 0.0), 3, RngSeed(1)).is_err());
    }
}
