//! LOS radiation patterns of an MRT-precoded array next to a SISO reference.

use super::config::ExperimentConfig;
use super::output::{fmt_db, fmt_num, output_path, write_csv};
use super::Chain;
use crate::analysis::{beampattern, conducted_band_powers, BandPowers, Beampattern};
use crate::channel::make_los;
use crate::dsp::db;
use crate::error::{Error, Result};
use crate::frontend::{apply_to_frame, calibrate_frame, NonlinearityModel};
use crate::geometry::{angle_grid_degrees, Direction, UlaGeometry};
use crate::precode::{allocate_power, mrt_precode, siso_reference_power, PrecodedFrame};
use crate::seed::RngSeed;
use rand::seq::index::sample;
use std::path::PathBuf;

/// Pattern of one user count.
#[derive(Debug, Clone)]
pub struct LosPatternCurve {
    pub num_users: usize,
    pub user_angles: Vec<Direction>,
    pub total_power: f64,
    pub model: NonlinearityModel,
    /// Band powers summed over antennas after the nonlinearity.
    pub conducted: BandPowers,
    pub conducted_aclr_db: f64,
    pub pattern: Beampattern,
}

#[derive(Debug, Clone)]
pub struct LosPatternResult {
    pub num_antennas: usize,
    pub curves: Vec<LosPatternCurve>,
    /// Omnidirectional SISO reference at unit power.
    pub siso_inband: f64,
    pub siso_oob: f64,
    pub siso_model: NonlinearityModel,
    pub siso_conducted_aclr_db: f64,
}

impl LosPatternResult {
    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let header = ["angle_deg", "array_inband_dB", "array_oob_dB", "siso_inband_dB", "siso_oob_dB"];
        let mut paths = Vec::new();
        for c in &self.curves {
            let rows: Vec<Vec<String>> = c
                .pattern
                .angles
                .iter()
                .zip(c.pattern.inband_power.iter().zip(&c.pattern.oob_power))
                .map(|(a, (i, o))| {
                    vec![
                        fmt_num(a.degrees()),
                        fmt_db(db(*i)),
                        fmt_db(db(*o)),
                        fmt_db(db(self.siso_inband)),
                        fmt_db(db(self.siso_oob)),
                    ]
                })
                .collect();
            let path = output_path(config, &format!("m{}k{}", self.num_antennas, c.num_users));
            write_csv(&path, config, &header, &rows)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// User angles: configured, or drawn without repetition from the grid
/// points inside the sector.
fn user_angles(config: &ExperimentConfig, grid: &[Direction], k: usize, seed: RngSeed) -> Result<Vec<Direction>> {
    if let Some(a) = &config.user_angles_deg {
        return Ok(a[..k].iter().map(|&d| Direction::from_degrees(d)).collect());
    }
    let sector: Vec<Direction> = grid
        .iter()
        .copied()
        .filter(|d| d.degrees().abs() <= config.sector_deg + 1e-9)
        .collect();
    if sector.len() < k {
        return Err(Error::config(
            "sector_deg",
            format!("only {} grid angles in the sector for {k} users", sector.len()),
        ));
    }
    let mut rng = seed.rng();
    let mut idx = sample(&mut rng, sector.len(), k).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| sector[i]).collect())
}

pub fn run_los_pattern(config: &ExperimentConfig) -> Result<LosPatternResult> {
    config.validate()?;
    let chain = Chain::new(config)?;
    let seed = RngSeed(config.seed);
    let m = config.num_antennas;
    let geometry = UlaGeometry::new(m, config.spacing_wavelengths, config.carrier_hz)?;
    let grid = angle_grid_degrees(config.angle_min_deg, config.angle_max_deg, config.angle_step_deg);
    let ratio = config.pa_ratio();

    let siso_sig = chain.user_signals(config, 1, seed.child("los-pattern/siso-symbols", 0));
    let siso = PrecodedFrame::single(&siso_sig[0], 1.0)?;
    let siso_model = calibrate_frame(&siso, ratio, config.siso_target_aclr_db, &chain.bands)?;
    let siso = apply_to_frame(&siso, &siso_model)?;
    let siso_geometry = UlaGeometry::new(1, config.spacing_wavelengths, config.carrier_hz)?;
    let siso_pattern = beampattern(&siso, &siso_geometry, &[Direction::BROADSIDE], &chain.bands)?;

    let mut curves = Vec::new();
    for &k in &config.user_counts {
        let angles = user_angles(config, &grid, k, seed.child("los-pattern/user-angles", k as u64))?;
        let gains = match &config.path_gains {
            Some(g) => g[..k].to_vec(),
            None => vec![1.0; k],
        };
        let allocation = allocate_power(&gains, config.allocation)?;
        let channel = make_los(geometry, angles.clone(), gains)?;
        let signals = chain.user_signals(config, k, seed.child("los-pattern/symbols", k as u64));
        let total_power = siso_reference_power(1.0, m, k)?;
        let frame = mrt_precode(&signals, &channel, &allocation, total_power)?;
        let model = calibrate_frame(&frame, ratio, config.target_aclr_db, &chain.bands)?;
        let frame = apply_to_frame(&frame, &model)?;
        let conducted = conducted_band_powers(&frame, &chain.bands)?;
        curves.push(LosPatternCurve {
            num_users: k,
            user_angles: angles,
            total_power,
            model,
            conducted,
            conducted_aclr_db: conducted.aclr_db()?,
            pattern: beampattern(&frame, &geometry, &grid, &chain.bands)?,
        });
    }
    Ok(LosPatternResult {
        num_antennas: m,
        curves,
        siso_inband: siso_pattern.inband_power[0],
        siso_oob: siso_pattern.oob_power[0],
        siso_model,
        siso_conducted_aclr_db: conducted_band_powers(&siso, &chain.bands)?.aclr_db()?,
    })
}
