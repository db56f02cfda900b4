//! Fading-averaged PSDs of a SISO link and an array link: transmitted,
//! at the served user and at an uncorrelated victim.

use super::config::ExperimentConfig;
use super::output::{fmt_db, fmt_num, output_path, write_csv};
use super::Chain;
use crate::analysis::{band_power, conducted_aclr, estimate_psd, received_signal, BandSpec, PsdEstimate};
use crate::channel::{sample_rayleigh_with, TapChannel};
use crate::dsp::db;
use crate::error::Result;
use crate::frontend::{apply_to_frame, calibrate_frame, NonlinearityModel};
use crate::precode::{mrt_precode, siso_reference_power, PowerAllocation, PrecodedFrame};
use crate::seed::RngSeed;
use rayon::prelude::*;
use std::path::PathBuf;

/// Three averaged densities on a common frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdSet {
    pub tx: Vec<f64>,
    pub rx_user: Vec<f64>,
    pub rx_victim: Vec<f64>,
}

impl PsdSet {
    fn zeros(n: usize) -> Self {
        PsdSet {
            tx: vec![0.0; n],
            rx_user: vec![0.0; n],
            rx_victim: vec![0.0; n],
        }
    }

    fn add(&mut self, o: &PsdSet) {
        for (a, b) in [(&mut self.tx, &o.tx), (&mut self.rx_user, &o.rx_user), (&mut self.rx_victim, &o.rx_victim)] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        for v in [&mut self.tx, &mut self.rx_user, &mut self.rx_victim] {
            for x in v.iter_mut() {
                *x *= s;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsdCompareResult {
    pub frequencies: Vec<f64>,
    pub bands: BandSpec,
    /// Normalized so the served user's in-band power is 1.
    pub siso: PsdSet,
    pub array: PsdSet,
    pub siso_model: NonlinearityModel,
    pub array_model: NonlinearityModel,
    /// Conducted ACLR of the calibration frames.
    pub siso_conducted_aclr_db: f64,
    pub array_conducted_aclr_db: f64,
}

impl PsdCompareResult {
    fn estimate(&self, density: &[f64]) -> PsdEstimate {
        PsdEstimate {
            frequencies: self.frequencies.clone(),
            density: density.to_vec(),
        }
    }

    fn band(&self, density: &[f64], band: (f64, f64)) -> Result<f64> {
        band_power(&self.estimate(density), band)
    }

    pub fn inband(&self, density: &[f64]) -> Result<f64> {
        self.band(density, self.bands.allocated())
    }

    /// Strongest adjacent band.
    pub fn oob(&self, density: &[f64]) -> Result<f64> {
        Ok(self
            .band(density, self.bands.adjacent_lower())?
            .max(self.band(density, self.bands.adjacent_upper())?))
    }

    /// Allocated-to-strongest-adjacent ratio of a density, dB.
    pub fn aclr_db(&self, density: &[f64]) -> Result<f64> {
        Ok(db(self.inband(density)? / self.oob(density)?))
    }

    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let header = [
            "frequency_hz",
            "siso_tx",
            "siso_rx_user",
            "siso_rx_victim",
            "array_tx",
            "array_rx_user",
            "array_rx_victim",
        ];
        let rows: Vec<Vec<String>> = (0..self.frequencies.len())
            .map(|i| {
                let mut r = vec![fmt_num(self.frequencies[i])];
                for set in [&self.siso, &self.array] {
                    r.push(fmt_db(db(set.tx[i])));
                    r.push(fmt_db(db(set.rx_user[i])));
                    r.push(fmt_db(db(set.rx_victim[i])));
                }
                r
            })
            .collect();
        let path = output_path(config, &format!("m{}k{}", config.num_antennas, config.user_counts[0]));
        write_csv(&path, config, &header, &rows)?;
        Ok(vec![path])
    }
}

struct System<'a> {
    config: &'a ExperimentConfig,
    chain: &'a Chain,
    antennas: usize,
    users: usize,
    label: &'static str,
    total_power: f64,
}

impl System<'_> {
    fn seed(&self, what: &str, index: u64) -> RngSeed {
        RngSeed(self.config.seed).child(&format!("psd-compare/{}-{what}", self.label), index)
    }

    fn channel(&self, what: &str, index: u64, users: usize) -> Result<TapChannel> {
        sample_rayleigh_with(
            self.antennas,
            users,
            self.config.num_taps,
            self.config.power_delay_profile,
            self.config.symbol_period(),
            self.seed(what, index),
        )
    }

    fn frame(&self, what: &str, index: u64) -> Result<(PrecodedFrame, TapChannel)> {
        let served = self.channel(&format!("{what}-served"), index, self.users)?;
        let signals = self
            .chain
            .user_signals(self.config, self.users, self.seed(&format!("{what}-symbols"), index));
        let frame = if self.antennas == 1 {
            PrecodedFrame::single(&signals[0], self.total_power)?
        } else {
            mrt_precode(&signals, &served, &PowerAllocation::equal(self.users), self.total_power)?
        };
        Ok((frame, served))
    }

    /// Calibrates, then averages PSDs over the realizations and normalizes
    /// to the served user's in-band power.
    fn run(&self, target: f64) -> Result<(Vec<f64>, PsdSet, NonlinearityModel, f64)> {
        let cfg = self.config;
        let bands = &self.chain.bands;
        let (cal, _) = self.frame("calibration", 0)?;
        let model = calibrate_frame(&cal, cfg.pa_ratio(), target, bands)?;
        let conducted = conducted_aclr(&apply_to_frame(&cal, &model)?, bands)?;
        let seg = cfg.psd_segment_length;
        let draws = (0..cfg.num_realizations)
            .into_par_iter()
            .map(|r| -> Result<(Vec<f64>, PsdSet)> {
                let (frame, served) = self.frame("frame", r as u64)?;
                let frame = apply_to_frame(&frame, &model)?;
                let victim = self.channel("victim", r as u64, 1)?;
                let mut tx = vec![0.0; seg];
                let mut freqs = Vec::new();
                for s in &frame.per_antenna {
                    let p = estimate_psd(s, seg)?;
                    for (a, b) in tx.iter_mut().zip(&p.density) {
                        *a += b;
                    }
                    freqs = p.frequencies;
                }
                let user = estimate_psd(&received_signal(&frame, &served, 0)?, seg)?;
                let vict = estimate_psd(&received_signal(&frame, &victim, 0)?, seg)?;
                Ok((
                    freqs,
                    PsdSet {
                        tx,
                        rx_user: user.density,
                        rx_victim: vict.density,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let freqs = draws[0].0.clone();
        let mut acc = PsdSet::zeros(seg);
        for (_, d) in &draws {
            acc.add(d);
        }
        let user_inband = band_power(
            &PsdEstimate {
                frequencies: freqs.clone(),
                density: acc.rx_user.clone(),
            },
            bands.allocated(),
        )?;
        acc.scale(1.0 / user_inband);
        Ok((freqs, acc, model, conducted))
    }
}

pub fn run_psd_compare(config: &ExperimentConfig) -> Result<PsdCompareResult> {
    config.validate()?;
    let chain = Chain::new(config)?;
    let m = config.num_antennas;
    let k = config.user_counts[0];
    let siso = System {
        config,
        chain: &chain,
        antennas: 1,
        users: 1,
        label: "siso",
        total_power: 1.0,
    };
    let array = System {
        config,
        chain: &chain,
        antennas: m,
        users: k,
        label: "array",
        total_power: siso_reference_power(1.0, m, k)?,
    };
    let (frequencies, siso_set, siso_model, siso_aclr) = siso.run(config.siso_target_aclr_db)?;
    let (_, array_set, array_model, array_aclr) = array.run(config.target_aclr_db)?;
    Ok(PsdCompareResult {
        frequencies,
        bands: chain.bands,
        siso: siso_set,
        array: array_set,
        siso_model,
        array_model,
        siso_conducted_aclr_db: siso_aclr,
        array_conducted_aclr_db: array_aclr,
    })
}
