//! Experiment configuration: JSON file, profile defaults and validation.

use crate::channel::{PowerDelayProfile, Region};
use crate::error::{Error, Result};
use crate::precode::AllocationMode;
use crate::waveform::SymbolAlphabet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LosPattern,
    FadingCcdf,
    ScatterMap,
    PsdCompare,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::LosPattern => "los-pattern",
            ExperimentKind::FadingCcdf => "fading-ccdf",
            ExperimentKind::ScatterMap => "scatter-map",
            ExperimentKind::PsdCompare => "psd-compare",
        }
    }
}

/// Quick (`ci`) or full-scale (`paper`) defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Ci,
    Paper,
}

/// One array size / user count pair of the fading experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub antennas: usize,
    pub users: usize,
}

impl Scenario {
    pub fn tag(&self) -> String {
        if self.antennas == 1 {
            "siso".to_string()
        } else {
            format!("m{}k{}", self.antennas, self.users)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Distance from the array to the center of the square, meters.
    pub east_m: f64,
    /// Side length, meters.
    pub size_m: f64,
}

impl RegionSpec {
    pub fn region(&self) -> Region {
        Region::square_east(self.east_m, self.size_m)
    }
}

/// The JSON file as written by users. Every field but `schema_version` is
/// optional and falls back to the profile default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub experiment: Option<ExperimentKind>,
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub baud_hz: Option<f64>,
    pub rolloff: Option<f64>,
    pub oversampling: Option<usize>,
    pub span_symbols: Option<usize>,
    pub carrier_hz: Option<f64>,
    pub spacing_wavelengths: Option<f64>,
    pub target_aclr_db: Option<f64>,
    pub siso_target_aclr_db: Option<f64>,
    pub pa_a3_over_a1: Option<[f64; 2]>,
    pub symbol_alphabet: Option<SymbolAlphabet>,
    pub num_symbols: Option<usize>,
    pub num_antennas: Option<usize>,
    pub user_counts: Option<Vec<usize>>,
    pub allocation: Option<AllocationMode>,
    pub path_gains: Option<Vec<f64>>,
    pub user_angles_deg: Option<Vec<f64>>,
    pub sector_deg: Option<f64>,
    pub angle_min_deg: Option<f64>,
    pub angle_max_deg: Option<f64>,
    pub angle_step_deg: Option<f64>,
    pub scenarios: Option<Vec<Scenario>>,
    pub num_taps: Option<usize>,
    pub power_delay_profile: Option<PowerDelayProfile>,
    pub num_realizations: Option<usize>,
    pub victims_per_frame: Option<usize>,
    pub ccdf_step_db: Option<f64>,
    pub num_scatterers: Option<usize>,
    pub region: Option<RegionSpec>,
    pub grid_points: Option<usize>,
    pub histogram_bin_db: Option<f64>,
    pub psd_segment_length: Option<usize>,
}

/// Fully resolved configuration of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub profile: Profile,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub baud_hz: f64,
    pub rolloff: f64,
    pub oversampling: usize,
    pub span_symbols: usize,
    pub carrier_hz: f64,
    pub spacing_wavelengths: f64,
    pub target_aclr_db: f64,
    pub siso_target_aclr_db: f64,
    pub pa_a3_over_a1: [f64; 2],
    pub symbol_alphabet: SymbolAlphabet,
    pub num_symbols: usize,
    pub num_antennas: usize,
    pub user_counts: Vec<usize>,
    pub allocation: AllocationMode,
    pub path_gains: Option<Vec<f64>>,
    pub user_angles_deg: Option<Vec<f64>>,
    pub sector_deg: f64,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub angle_step_deg: f64,
    pub scenarios: Vec<Scenario>,
    pub num_taps: usize,
    pub power_delay_profile: PowerDelayProfile,
    pub num_realizations: usize,
    pub victims_per_frame: usize,
    pub ccdf_step_db: f64,
    pub num_scatterers: usize,
    pub region: RegionSpec,
    pub grid_points: usize,
    pub histogram_bin_db: f64,
    pub psd_segment_length: usize,
}

impl ExperimentConfig {
    /// Defaults for an experiment under a profile.
    pub fn defaults(experiment: ExperimentKind, profile: Profile) -> Self {
        use ExperimentKind::*;
        let paper = profile == Profile::Paper;
        let (num_antennas, user_counts) = match experiment {
            LosPattern if paper => (300, vec![1, 4, 15, 30]),
            LosPattern => (64, vec![1, 3, 6]),
            ScatterMap => (100, vec![3]),
            FadingCcdf | PsdCompare => (100, vec![10]),
        };
        let num_realizations = match experiment {
            FadingCcdf if paper => 100_000,
            FadingCcdf => 10_000,
            PsdCompare if paper => 400,
            PsdCompare => 100,
            _ => 1,
        };
        let num_symbols = match experiment {
            PsdCompare => 4096,
            _ => 1024,
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            profile,
            seed: 1,
            out_dir: PathBuf::from("out"),
            baud_hz: 20e6,
            rolloff: 0.22,
            oversampling: 7,
            span_symbols: 32,
            carrier_hz: 28e9,
            spacing_wavelengths: 0.5,
            target_aclr_db: 23.0,
            siso_target_aclr_db: 23.0,
            pa_a3_over_a1: [-0.05, 0.0],
            symbol_alphabet: SymbolAlphabet::Gaussian,
            num_symbols,
            num_antennas,
            user_counts,
            allocation: AllocationMode::Equal,
            path_gains: None,
            user_angles_deg: None,
            sector_deg: 60.0,
            angle_min_deg: -90.0,
            angle_max_deg: 90.0,
            angle_step_deg: 0.25,
            scenarios: vec![
                Scenario { antennas: 1, users: 1 },
                Scenario { antennas: 100, users: 1 },
                Scenario { antennas: 100, users: 10 },
            ],
            num_taps: 15,
            power_delay_profile: PowerDelayProfile::Uniform,
            num_realizations,
            victims_per_frame: 250,
            ccdf_step_db: 0.1,
            num_scatterers: 20,
            region: RegionSpec {
                east_m: 250.0,
                size_m: 100.0,
            },
            grid_points: 100,
            histogram_bin_db: 1.0,
            psd_segment_length: 4096,
        }
    }

    /// Merges a parsed file over the defaults of `experiment`. The profile
    /// comes from `profile_override`, else the file, else `ci`.
    pub fn resolve(experiment: ExperimentKind, file: &ConfigFile, profile_override: Option<Profile>) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
            ));
        }
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(Error::config(
                    "experiment",
                    format!("file is for `{}`, but `{}` was requested", e.as_str(), experiment.as_str()),
                ));
            }
        }
        let profile = profile_override.or(file.profile).unwrap_or_default();
        let mut c = ExperimentConfig::defaults(experiment, profile);
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = file.$f.clone() { c.$f = v; } )* };
        }
        take!(
            seed, out_dir, baud_hz, rolloff, oversampling, span_symbols, carrier_hz, spacing_wavelengths,
            target_aclr_db, pa_a3_over_a1, symbol_alphabet, num_symbols, num_antennas, user_counts,
            allocation, sector_deg, angle_min_deg, angle_max_deg, angle_step_deg, scenarios, num_taps,
            power_delay_profile, num_realizations, victims_per_frame, ccdf_step_db, num_scatterers,
            region, grid_points, histogram_bin_db, psd_segment_length
        );
        c.siso_target_aclr_db = file.siso_target_aclr_db.unwrap_or(c.target_aclr_db);
        c.path_gains = file.path_gains.clone();
        c.user_angles_deg = file.user_angles_deg.clone();
        Ok(c)
    }

    pub fn from_json(experiment: ExperimentKind, text: &str, profile_override: Option<Profile>) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::resolve(experiment, &file, profile_override)
    }

    pub fn from_path(experiment: ExperimentKind, path: &Path, profile_override: Option<Profile>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(experiment, &text, profile_override)
    }

    pub fn pa_ratio(&self) -> Complex64 {
        Complex64::new(self.pa_a3_over_a1[0], self.pa_a3_over_a1[1])
    }

    pub fn sample_rate(&self) -> f64 {
        self.baud_hz * self.oversampling as f64
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.baud_hz
    }

    pub fn max_users(&self) -> usize {
        self.user_counts.iter().copied().max().unwrap_or(0)
    }

    /// Field-level checks; all failures are config errors.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive and finite, got {v}")))
            }
        }
        fn at_least(field: &str, v: usize, min: usize) -> Result<()> {
            if v >= min {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be at least {min}, got {v}")))
            }
        }
        positive("baud_hz", self.baud_hz)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("spacing_wavelengths", self.spacing_wavelengths)?;
        positive("angle_step_deg", self.angle_step_deg)?;
        positive("ccdf_step_db", self.ccdf_step_db)?;
        positive("histogram_bin_db", self.histogram_bin_db)?;
        positive("sector_deg", self.sector_deg)?;
        positive("region.size_m", self.region.size_m)?;
        if !self.region.east_m.is_finite() || self.region.east_m - self.region.size_m / 2.0 <= 0.0 {
            return Err(Error::config("region.east_m", "the region must lie entirely east of the array"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::config("rolloff", format!("{} is outside [0, 1]", self.rolloff)));
        }
        at_least("oversampling", self.oversampling, 1)?;
        at_least("span_symbols", self.span_symbols, 1)?;
        at_least("num_symbols", self.num_symbols, 16)?;
        at_least("num_antennas", self.num_antennas, 1)?;
        at_least("num_taps", self.num_taps, 1)?;
        at_least("num_realizations", self.num_realizations, 1)?;
        at_least("victims_per_frame", self.victims_per_frame, 1)?;
        at_least("num_scatterers", self.num_scatterers, 1)?;
        at_least("grid_points", self.grid_points, 2)?;
        at_least("psd_segment_length", self.psd_segment_length, 16)?;
        for (f, v) in [("target_aclr_db", self.target_aclr_db), ("siso_target_aclr_db", self.siso_target_aclr_db)] {
            if !v.is_finite() {
                return Err(Error::config(f, "must be finite"));
            }
        }
        if !self.pa_a3_over_a1.iter().all(|v| v.is_finite()) {
            return Err(Error::config("pa_a3_over_a1", "must be finite"));
        }
        // the adjacent bands must fit below Nyquist
        if 1.5 * (1.0 + self.rolloff) > self.oversampling as f64 / 2.0 {
            return Err(Error::config(
                "oversampling",
                "too small to hold the allocated and both adjacent bands",
            ));
        }
        if !(self.angle_max_deg > self.angle_min_deg) {
            return Err(Error::config("angle_max_deg", "must exceed angle_min_deg"));
        }
        if self.user_counts.is_empty() || self.user_counts.contains(&0) {
            return Err(Error::config("user_counts", "must be a nonempty list of positive counts"));
        }
        let needs_k_le_m = matches!(
            self.experiment,
            ExperimentKind::LosPattern | ExperimentKind::ScatterMap | ExperimentKind::PsdCompare
        );
        if needs_k_le_m && self.max_users() > self.num_antennas {
            return Err(Error::config(
                "user_counts",
                format!("K = {} exceeds M = {}", self.max_users(), self.num_antennas),
            ));
        }
        if let Some(g) = &self.path_gains {
            if g.len() < self.max_users() {
                return Err(Error::config(
                    "path_gains",
                    format!("need at least {} entries, got {}", self.max_users(), g.len()),
                ));
            }
            if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::config("path_gains", "gains must be positive and finite"));
            }
        }
        if let Some(a) = &self.user_angles_deg {
            if a.len() < self.max_users() {
                return Err(Error::config(
                    "user_angles_deg",
                    format!("need at least {} entries, got {}", self.max_users(), a.len()),
                ));
            }
            if a.iter().any(|v| !v.is_finite() || v.abs() > 90.0) {
                return Err(Error::config("user_angles_deg", "angles must lie in [-90, 90]"));
            }
        }
        if self.experiment == ExperimentKind::FadingCcdf {
            if self.scenarios.is_empty() {
                return Err(Error::config("scenarios", "at least one scenario is required"));
            }
            for s in &self.scenarios {
                if s.antennas == 0 || s.users == 0 || s.users > s.antennas {
                    return Err(Error::config(
                        "scenarios",
                        format!("invalid scenario M = {}, K = {}", s.antennas, s.users),
                    ));
                }
            }
            if self.num_realizations < 1000 {
                return Err(Error::config("num_realizations", "the fading experiment needs at least 1000"));
            }
        }
        if self.experiment == ExperimentKind::PsdCompare
            && self.num_symbols * self.oversampling < 2 * self.psd_segment_length
        {
            return Err(Error::config(
                "psd_segment_length",
                "frames must hold at least two segments",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gives_profile_defaults() {
        let c = ExperimentConfig::from_json(ExperimentKind::LosPattern, r#"{"schema_version": 1}"#, None).unwrap();
        assert_eq!(c, ExperimentConfig::defaults(ExperimentKind::LosPattern, Profile::Ci));
        c.validate().unwrap();
        let p = ExperimentConfig::from_json(
            ExperimentKind::LosPattern,
            r#"{"schema_version": 1, "profile": "paper"}"#,
            None,
        )
        .unwrap();
        assert_eq!(p.num_antennas, 300);
        assert_eq!(p.user_counts, vec![1, 4, 15, 30]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json(ExperimentKind::LosPattern, r#"{"schema_version": 1, "antennas": 3}"#, None);
        assert!(matches!(e, Err(Error::Config { .. })));
    }

    #[test]
    fn schema_version_is_required_and_checked() {
        assert!(ExperimentConfig::from_json(ExperimentKind::LosPattern, "{}", None).is_err());
        assert!(ExperimentConfig::from_json(ExperimentKind::LosPattern, r#"{"schema_version": 2}"#, None).is_err());
    }

    #[test]
    fn experiment_must_match() {
        let e = ExperimentConfig::from_json(
            ExperimentKind::LosPattern,
            r#"{"schema_version": 1, "experiment": "fading-ccdf"}"#,
            None,
        );
        assert!(e.is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::defaults(ExperimentKind::LosPattern, Profile::Ci);
        c.rolloff = 1.5;
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "rolloff"),
            other => panic!("{other:?}"),
        }
        let mut c = ExperimentConfig::defaults(ExperimentKind::LosPattern, Profile::Ci);
        c.user_counts = vec![100];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::defaults(ExperimentKind::FadingCcdf, Profile::Ci);
        c.num_realizations = 10;
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::from_json(
            ExperimentKind::FadingCcdf,
            r#"{"schema_version": 1, "seed": 9, "scenarios": [{"antennas": 4, "users": 2}],
                "power_delay_profile": {"kind": "exponential", "decay_db_per_tap": 1.5}}"#,
            Some(Profile::Paper),
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.profile, Profile::Paper);
        assert_eq!(c.num_realizations, 100_000);
        assert_eq!(c.scenarios, vec![Scenario { antennas: 4, users: 2 }]);
    }
}
