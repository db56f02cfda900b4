//! Distribution of the adjacent-band power received by a victim in i.i.d.
//! Rayleigh fading, for SISO and array transmitters at equal ACLR.

use super::config::{ExperimentConfig, Scenario};
use super::output::{fmt_db, fmt_num, output_path, write_csv};
use super::Chain;
use crate::analysis::{
    conducted_aclr, empirical_ccdf, mean_db, percentile, std_db, threshold_grid, CcdfCurve, VictimEvaluator,
};
use crate::channel::{sample_rayleigh_with, TapChannel};
use crate::dsp::db;
use crate::error::Result;
use crate::frontend::{apply_to_frame, calibrate_frame, NonlinearityModel};
use crate::precode::{mrt_precode, siso_reference_power, PowerAllocation, PrecodedFrame};
use crate::seed::RngSeed;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub total_power: f64,
    pub model: NonlinearityModel,
    /// Conducted ACLR of the calibration frame.
    pub conducted_aclr_db: f64,
    /// Victim OOB power per realization, dB, in draw order.
    pub victim_oob_db: Vec<f64>,
    /// Mean in-band power at the served users, dB.
    pub served_inband_db: f64,
    pub ccdf: CcdfCurve,
}

impl ScenarioResult {
    /// Mean of the victim OOB power, taken in linear scale.
    pub fn mean_db(&self) -> f64 {
        mean_db(&self.victim_oob_db)
    }

    pub fn std_db(&self) -> f64 {
        std_db(&self.victim_oob_db)
    }

    /// `P(X > mean + delta_db)`.
    pub fn tail_probability(&self, delta_db: f64) -> f64 {
        let t = self.mean_db() + delta_db;
        self.victim_oob_db.iter().filter(|&&x| x > t).count() as f64 / self.victim_oob_db.len() as f64
    }

    /// Spread between the 1st and 99th percentiles, dB.
    pub fn percentile_spread_db(&self) -> f64 {
        percentile(&self.victim_oob_db, 0.99) - percentile(&self.victim_oob_db, 0.01)
    }
}

#[derive(Debug, Clone)]
pub struct FadingCcdfResult {
    pub scenarios: Vec<ScenarioResult>,
}

impl FadingCcdfResult {
    pub fn scenario(&self, antennas: usize, users: usize) -> Option<&ScenarioResult> {
        self.scenarios
            .iter()
            .find(|s| s.scenario.antennas == antennas && s.scenario.users == users)
    }

    pub fn write(&self, config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for s in &self.scenarios {
            let mut rows: Vec<Vec<String>> = s
                .ccdf
                .thresholds
                .iter()
                .zip(&s.ccdf.probability)
                .map(|(t, p)| vec![fmt_db(*t), fmt_num(*p)])
                .collect();
            rows.push(vec!["mean_dB".into(), fmt_db(s.mean_db())]);
            let path = output_path(config, &s.scenario.tag());
            write_csv(&path, config, &["threshold_dB", "ccdf"], &rows)?;
            paths.push(path);
        }
        let header = [
            "scenario",
            "antennas",
            "users",
            "realizations",
            "mean_oob_dB",
            "std_oob_dB",
            "p01_oob_dB",
            "p99_oob_dB",
            "tail_prob_3dB",
            "served_inband_dB",
            "conducted_aclr_dB",
        ];
        let rows: Vec<Vec<String>> = self
            .scenarios
            .iter()
            .map(|s| {
                vec![
                    s.scenario.tag(),
                    s.scenario.antennas.to_string(),
                    s.scenario.users.to_string(),
                    s.victim_oob_db.len().to_string(),
                    fmt_db(s.mean_db()),
                    fmt_db(s.std_db()),
                    fmt_db(percentile(&s.victim_oob_db, 0.01)),
                    fmt_db(percentile(&s.victim_oob_db, 0.99)),
                    fmt_num(s.tail_probability(3.0)),
                    fmt_db(s.served_inband_db),
                    fmt_db(s.conducted_aclr_db),
                ]
            })
            .collect();
        let path = output_path(config, "summary");
        write_csv(&path, config, &header, &rows)?;
        paths.push(path);
        Ok(paths)
    }
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    chain: &'a Chain,
    scenario: Scenario,
    seed: RngSeed,
    tag: String,
    total_power: f64,
}

impl Setup<'_> {
    fn channel(&self, label: &str, index: u64, users: usize) -> Result<TapChannel> {
        sample_rayleigh_with(
            self.scenario.antennas,
            users,
            self.config.num_taps,
            self.config.power_delay_profile,
            self.config.symbol_period(),
            self.seed.child(&format!("{}/{label}", self.tag), index),
        )
    }

    /// Undistorted frame `index` and the served channel it was precoded for.
    fn frame(&self, label: &str, index: u64) -> Result<(PrecodedFrame, TapChannel)> {
        let k = self.scenario.users;
        let served = self.channel(&format!("{label}-served"), index, k)?;
        let signals = self.chain.user_signals(
            self.config,
            k,
            self.seed.child(&format!("{}/{label}-symbols", self.tag), index),
        );
        let frame = if self.scenario.antennas == 1 {
            PrecodedFrame::single(&signals[0], self.total_power)?
        } else {
            mrt_precode(&signals, &served, &PowerAllocation::equal(k), self.total_power)?
        };
        Ok((frame, served))
    }
}

fn run_scenario(config: &ExperimentConfig, chain: &Chain, scenario: Scenario) -> Result<ScenarioResult> {
    let tag = scenario.tag();
    let target = if scenario.antennas == 1 {
        config.siso_target_aclr_db
    } else {
        config.target_aclr_db
    };
    let setup = Setup {
        config,
        chain,
        scenario,
        seed: RngSeed(config.seed),
        total_power: siso_reference_power(1.0, scenario.antennas, scenario.users)?,
        tag,
    };
    let (cal, _) = setup.frame("calibration", 0)?;
    let model = calibrate_frame(&cal, config.pa_ratio(), target, &chain.bands)?;
    let conducted = conducted_aclr(&apply_to_frame(&cal, &model)?, &chain.bands)?;

    let total = config.num_realizations;
    let per = config.victims_per_frame;
    let frames = total.div_ceil(per);
    let per_frame: Vec<(Vec<f64>, f64)> = (0..frames)
        .into_par_iter()
        .map(|f| -> Result<(Vec<f64>, f64)> {
            let (frame, served) = setup.frame("frame", f as u64)?;
            let frame = apply_to_frame(&frame, &model)?;
            let eval = VictimEvaluator::new(&frame, &chain.bands)?;
            let mut served_inband = 0.0;
            for k in 0..scenario.users {
                served_inband += eval.evaluate(&served, k)?.allocated;
            }
            let count = per.min(total - f * per);
            let oob = (0..count)
                .map(|v| {
                    let victim = setup.channel("victim", (f * per + v) as u64, 1)?;
                    Ok(db(eval.evaluate(&victim, 0)?.oob()))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((oob, served_inband / scenario.users as f64))
        })
        .collect::<Result<Vec<_>>>()?;

    let served_inband_db = db(per_frame.iter().map(|p| p.1).sum::<f64>() / frames as f64);
    let victim_oob_db: Vec<f64> = per_frame.into_iter().flat_map(|p| p.0).collect();
    let lo = victim_oob_db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = victim_oob_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let step = config.ccdf_step_db;
    let grid = threshold_grid((lo / step).floor() * step, (hi / step).ceil() * step, step);
    let ccdf = empirical_ccdf(&victim_oob_db, &grid)?;
    Ok(ScenarioResult {
        scenario,
        total_power: setup.total_power,
        model,
        conducted_aclr_db: conducted,
        victim_oob_db,
        served_inband_db,
        ccdf,
    })
}

pub fn run_fading_ccdf(config: &ExperimentConfig) -> Result<FadingCcdfResult> {
    config.validate()?;
    let chain = Chain::new(config)?;
    let scenarios = config
        .scenarios
        .iter()
        .map(|&s| run_scenario(config, &chain, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(FadingCcdfResult { scenarios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{ExperimentKind, Profile};

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(ExperimentKind::FadingCcdf, Profile::Ci);
        c.num_symbols = 128;
        c.num_realizations = 1000;
        c.victims_per_frame = 300;
        c.num_taps = 4;
        c.scenarios = vec![Scenario { antennas: 1, users: 1 }, Scenario { antennas: 8, users: 2 }];
        c
    }

    #[test]
    fn shapes_and_determinism() {
        let c = small();
        let a = run_fading_ccdf(&c).unwrap();
        assert_eq!(a.scenarios.len(), 2);
        for s in &a.scenarios {
            assert_eq!(s.victim_oob_db.len(), 1000);
            assert!((s.conducted_aclr_db - 23.0).abs() < 0.25);
            assert_eq!(s.ccdf.probability[0], 1.0);
            assert_eq!(*s.ccdf.probability.last().unwrap(), 0.0);
        }
        let b = run_fading_ccdf(&c).unwrap();
        assert_eq!(a.scenarios[1].victim_oob_db, b.scenarios[1].victim_oob_db);
    }

    #[test]
    fn mean_gap_follows_power_scaling() {
        let c = small();
        let r = run_fading_ccdf(&c).unwrap();
        let gap = r.scenario(1, 1).unwrap().mean_db() - r.scenario(8, 2).unwrap().mean_db();
        // total power K/M = 1/4
        assert!((gap - 6.02).abs() < 1.0, "{gap}");
        let served = r.scenario(1, 1).unwrap().served_inband_db - r.scenario(8, 2).unwrap().served_inband_db;
        assert!(served.abs() < 1.0, "{served}");
    }
}
