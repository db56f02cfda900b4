//! Experiment runners behind the `oobsim` CLI.
//!
//! Each runner is a pure function of its [`ExperimentConfig`] (including the
//! master seed) and returns a result struct; [`run`] additionally writes the
//! CSV artifacts.

pub mod config;
pub mod fading_ccdf;
pub mod los_pattern;
pub mod output;
pub mod psd_compare;
pub mod scatter_map;

pub use config::{ConfigFile, ExperimentConfig, ExperimentKind, Profile, RegionSpec, Scenario, SCHEMA_VERSION};
pub use fading_ccdf::{run_fading_ccdf, FadingCcdfResult, ScenarioResult};
pub use los_pattern::{run_los_pattern, LosPatternCurve, LosPatternResult};
pub use psd_compare::{run_psd_compare, PsdCompareResult, PsdSet};
pub use scatter_map::{run_scatter_map, ScatterMapResult};

use crate::analysis::BandSpec;
use crate::error::Result;
use crate::seed::RngSeed;
use crate::waveform::{design_rrc, generate_symbols_with, pulse_shape_periodic, PulseShape, SampledSignal};
use std::path::PathBuf;

/// Pulse shape and bands shared by all runners.
#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub shape: PulseShape,
    pub bands: BandSpec,
}

impl Chain {
    pub fn new(c: &ExperimentConfig) -> Result<Self> {
        Ok(Chain {
            shape: design_rrc(c.rolloff, c.span_symbols, c.oversampling)?,
            bands: BandSpec::for_pulse(c.baud_hz, c.rolloff)?,
        })
    }

    /// `k` periodic unit-power user signals of `c.num_symbols` symbols.
    pub fn user_signals(&self, c: &ExperimentConfig, k: usize, seed: RngSeed) -> Vec<SampledSignal> {
        generate_symbols_with(c.symbol_alphabet, k, c.num_symbols, seed)
            .iter()
            .map(|s| pulse_shape_periodic(s, &self.shape, c.baud_hz))
            .collect()
    }
}

/// Validates, runs and writes the artifacts of one experiment. Returns the
/// written paths.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::LosPattern => run_los_pattern(config)?.write(config),
        ExperimentKind::FadingCcdf => run_fading_ccdf(config)?.write(config),
        ExperimentKind::ScatterMap => run_scatter_map(config)?.write(config),
        ExperimentKind::PsdCompare => run_psd_compare(config)?.write(config),
    }
}
