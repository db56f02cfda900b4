//! In-band and OOB power over a square region served through a
//! single-bounce scatterer channel.

use super::config::ExperimentConfig;
use super::output::{fmt_db, fmt_num, output_path, write_csv};
use super::Chain;
use crate::analysis::{conducted_band_powers, Band, BandPowers};
use crate::channel::{sample_scatter_map, Point, ScatterMap};
use crate::dsp::{self, db};
use crate::error::{Error, Result};
use crate::frontend::{apply_to_frame, calibrate_frame, NonlinearityModel};
use crate::geometry::{UlaGeometry, SPEED_OF_LIGHT};
use crate::precode::{allocate_power, mrt_precode, siso_reference_power, PrecodedFrame};
use crate::seed::RngSeed;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct ScatterMapResult {
    pub layout: ScatterMap,
    pub grid_points: usize,
    /// Grid node `(i, j)` of each user.
    pub user_nodes: Vec<(usize, usize)>,
    pub model: NonlinearityModel,
    /// Band powers summed over antennas after the nonlinearity.
    pub conducted: BandPowers,
    /// Row-major over `(i, j)`, `i` along x.
    pub points: Vec<Point>,
    pub inband_db: Vec<f64>,
    pub oob_db: Vec<f64>,
}

/// Population variance.
fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

impl ScatterMapResult {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid_points + j
    }

    /// Spatial variance of the in-band map, dB².
    pub fn inband_variance_db2(&self) -> f64 {
        variance(&self.inband_db)
    }

    pub fn oob_variance_db2(&self) -> f64 {
        variance(&self.oob_db)
    }

    /// Histogram over shared 1-bin-wide dB edges: `(low, high, inband, oob)`.
    pub fn histogram(&self, bin_db: f64) -> Vec<(f64, f64, usize, usize)> {
        let all = self.inband_db.iter().chain(&self.oob_db).copied();
        let lo = (all.clone().fold(f64::INFINITY, f64::min) / bin_db).floor() * bin_db;
        let hi = all.fold(f64::NEG_INFINITY, f64::max);
        let n = (((hi - lo) / bin_db).floor() as usize) + 1;
        let mut out: Vec<(f64, f64, usize, usize)> = (0..n)
            .map(|b| (lo + b as f64 * bin_db, lo + (b + 1) as f64 * bin_db, 0, 0))
            .collect();
        let slot = |v: f64| (((v - lo) / bin_db).floor() as usize).min(n - 1);
        for &v in &self.inband_db {
            out[slot(v)].2 += 1;
        }
        for &v in &self.oob_db {
            out[slot(v)].3 += 1;
        }
        out
    }

    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .zip(self.inband_db.iter().zip(&self.oob_db))
            .map(|(p, (i, o))| vec![fmt_num(p.x), fmt_num(p.y), fmt_db(*i), fmt_db(*o)])
            .collect();
        let map = output_path(config, "map");
        write_csv(&map, config, &["x_m", "y_m", "inband_dB", "oob_dB"], &rows)?;

        let rows: Vec<Vec<String>> = self
            .histogram(config.histogram_bin_db)
            .into_iter()
            .map(|(l, h, a, b)| vec![fmt_db(l), fmt_db(h), a.to_string(), b.to_string()])
            .collect();
        let hist = output_path(config, "hist");
        write_csv(&hist, config, &["bin_low_dB", "bin_high_dB", "inband_count", "oob_count"], &rows)?;

        let mut rows = Vec::new();
        let m = self.layout.geometry.num_antennas;
        for a in 0..m {
            let p = self.layout.element_position(a);
            rows.push(vec!["antenna".into(), a.to_string(), fmt_num(p.x), fmt_num(p.y)]);
        }
        for (s, p) in self.layout.scatterers.iter().enumerate() {
            rows.push(vec!["scatterer".into(), s.to_string(), fmt_num(p.x), fmt_num(p.y)]);
        }
        for (u, p) in self.layout.users.iter().enumerate() {
            rows.push(vec!["user".into(), u.to_string(), fmt_num(p.x), fmt_num(p.y)]);
        }
        let layout = output_path(config, "layout");
        write_csv(&layout, config, &["kind", "index", "x_m", "y_m"], &rows)?;
        Ok(vec![map, hist, layout])
    }
}

/// Band powers at arbitrary terminals for one transmitted frame.
///
/// The received spectrum at a terminal is
/// `Σ_s e^{-j2π(fc+f)·d2_s/c}/d2_s · Z_s(f)` where
/// `Z_s(f) = g·Σ_m Y_m(f)·e^{-j2π(fc+f)·d1_ms/c}/d1_ms` only depends on the
/// array side, so it is computed once.
struct MapEvaluator {
    n: usize,
    /// Band bins sorted by frequency.
    freqs: Vec<f64>,
    bands: Vec<Band>,
    /// `[s][bin]`
    z: Vec<Vec<Complex64>>,
    carrier: f64,
    scatterers: Vec<Point>,
}

impl MapEvaluator {
    fn new(frame: &PrecodedFrame, layout: &ScatterMap, spec: &crate::analysis::BandSpec) -> Self {
        let n = frame.len();
        let fs = frame.sample_rate();
        let mut sel: Vec<(f64, usize, Band)> = (0..n)
            .filter_map(|k| {
                let f = dsp::bin_frequency(k, n, fs);
                spec.classify(f).map(|b| (f, k, b))
            })
            .collect();
        sel.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spectra = frame.spectra();
        let fc = layout.geometry.carrier_frequency;
        let m_count = frame.num_antennas();
        let z = (0..layout.scatterers.len())
            .into_par_iter()
            .map(|s| {
                let d1: Vec<f64> = (0..m_count).map(|m| layout.leg_distance(m, s)).collect();
                sel.iter()
                    .map(|&(f, k, _)| {
                        let w = -2.0 * PI * (fc + f) / SPEED_OF_LIGHT;
                        d1.iter()
                            .zip(&spectra)
                            .map(|(&d, y)| y[k] * Complex64::from_polar(layout.reflection / d, w * d))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        MapEvaluator {
            n,
            freqs: sel.iter().map(|s| s.0).collect(),
            bands: sel.iter().map(|s| s.2).collect(),
            z,
            carrier: fc,
            scatterers: layout.scatterers.clone(),
        }
    }

    fn powers(&self, p: Point) -> Result<BandPowers> {
        let nb = self.freqs.len();
        let mut r = vec![Complex64::new(0.0, 0.0); nb];
        let df = if nb > 1 { self.freqs[1] - self.freqs[0] } else { 0.0 };
        for (s, (sc, zs)) in self.scatterers.iter().zip(&self.z).enumerate() {
            let d = sc.distance(&p);
            if d < 1e-6 {
                return Err(Error::CoincidentTerminal { x: p.x, y: p.y, scatterer: s });
            }
            let w = -2.0 * PI * d / SPEED_OF_LIGHT;
            // phase recursion over the uniform frequency grid
            let step = Complex64::from_polar(1.0, w * df);
            let mut ph = Complex64::from_polar(1.0 / d, w * (self.carrier + self.freqs[0]));
            for (acc, zv) in r.iter_mut().zip(zs) {
                *acc += ph * zv;
                ph *= step;
            }
        }
        let norm = 1.0 / (self.n as f64 * self.n as f64);
        let mut out = BandPowers::default();
        for (v, b) in r.iter().zip(&self.bands) {
            let e = v.norm_sqr() * norm;
            match b {
                Band::Allocated => out.allocated += e,
                Band::Lower => out.lower += e,
                Band::Upper => out.upper += e,
            }
        }
        Ok(out)
    }
}

pub fn run_scatter_map(config: &ExperimentConfig) -> Result<ScatterMapResult> {
    config.validate()?;
    let chain = Chain::new(config)?;
    let seed = RngSeed(config.seed);
    let m = config.num_antennas;
    let k = config.user_counts[0];
    let n = config.grid_points;
    let geometry = UlaGeometry::new(m, config.spacing_wavelengths, config.carrier_hz)?;
    let region = config.region.region();
    let mut layout = sample_scatter_map(
        geometry,
        config.num_scatterers,
        region,
        k,
        seed.child("scatter-map/layout", 0),
    )?;
    let user_nodes: Vec<(usize, usize)> = layout.users.iter().map(|u| region.nearest_node(u, n)).collect();
    layout.users = user_nodes.iter().map(|&(i, j)| region.grid_point(i, j, n)).collect();

    let channel = layout.users_channel()?;
    let gains = match &config.path_gains {
        Some(g) => g[..k].to_vec(),
        None => vec![1.0; k],
    };
    let allocation = allocate_power(&gains, config.allocation)?;
    let signals = chain.user_signals(config, k, seed.child("scatter-map/symbols", 0));
    let frame = mrt_precode(&signals, &channel, &allocation, siso_reference_power(1.0, m, k)?)?;
    let model = calibrate_frame(&frame, config.pa_ratio(), config.target_aclr_db, &chain.bands)?;
    let frame = apply_to_frame(&frame, &model)?;

    let conducted = conducted_band_powers(&frame, &chain.bands)?;
    let eval = MapEvaluator::new(&frame, &layout, &chain.bands);
    let points: Vec<Point> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| region.grid_point(i, j, n))
        .collect();
    let powers = points
        .par_iter()
        .map(|&p| eval.powers(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatterMapResult {
        layout,
        grid_points: n,
        user_nodes,
        model,
        conducted,
        points,
        inband_db: powers.iter().map(|p| db(p.allocated)).collect(),
        oob_db: powers.iter().map(|p| db(p.oob())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{dft_band_powers, BandSpec};
    use crate::experiments::config::{ExperimentKind, Profile};

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(ExperimentKind::ScatterMap, Profile::Ci);
        c.num_antennas = 16;
        c.num_symbols = 128;
        c.grid_points = 12;
        c
    }

    #[test]
    fn evaluator_matches_direct_channel() {
        let c = small();
        let r = run_scatter_map(&c).unwrap();
        // rebuild the frame and compare one point against the generic path
        let chain = Chain::new(&c).unwrap();
        let ch = r.layout.users_channel().unwrap();
        let sig = chain.user_signals(&c, 3, RngSeed(c.seed).child("scatter-map/symbols", 0));
        let frame = mrt_precode(&sig, &ch, &crate::precode::PowerAllocation::equal(3), 3.0 / 16.0).unwrap();
        let frame = apply_to_frame(&frame, &r.model).unwrap();
        let p = Point::new(231.0, 17.0);
        let eval = MapEvaluator::new(&frame, &r.layout, &chain.bands);
        let fast = eval.powers(p).unwrap();
        let ray = r.layout.channel_at(p).unwrap();
        let spectra = frame.spectra();
        let n = frame.len();
        let rx: Vec<Complex64> = (0..n)
            .map(|k| {
                let h = ray.response(dsp::bin_frequency(k, n, frame.sample_rate()));
                h.iter().zip(&spectra).map(|(a, y)| a * y[k]).sum()
            })
            .collect();
        let bands = BandSpec::for_pulse(c.baud_hz, c.rolloff).unwrap();
        let slow = dft_band_powers(&rx, frame.sample_rate(), &bands).unwrap();
        assert!((fast.allocated / slow.allocated - 1.0).abs() < 1e-8);
        assert!((fast.upper / slow.upper - 1.0).abs() < 1e-8);
        assert!((fast.lower / slow.lower - 1.0).abs() < 1e-8);
    }

    #[test]
    fn users_on_grid_and_deterministic() {
        let c = small();
        let a = run_scatter_map(&c).unwrap();
        let b = run_scatter_map(&c).unwrap();
        assert_eq!(a.inband_db, b.inband_db);
        assert_eq!(a.layout, b.layout);
        assert_eq!(a.points.len(), 144);
        for (u, &(i, j)) in a.layout.users.iter().zip(&a.user_nodes) {
            assert_eq!(*u, a.points[a.index(i, j)]);
        }
        let h = a.histogram(1.0);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 144);
        assert_eq!(h.iter().map(|b| b.3).sum::<usize>(), 144);
    }
}
