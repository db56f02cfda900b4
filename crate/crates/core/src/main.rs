use clap::{Args, Parser, Subcommand, ValueEnum};
use oobsim::experiments::{run, ConfigFile, ExperimentConfig, ExperimentKind, Profile, SCHEMA_VERSION};
use oobsim::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spatial out-of-band radiation experiments.
#[derive(Debug, Parser)]
#[command(name = "oobsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// LOS beampatterns of an MRT array against a SISO reference.
    LosPattern(Common),
    /// CCDF of victim OOB power in i.i.d. Rayleigh fading.
    FadingCcdf(Common),
    /// In-band and OOB heat maps over a scatterer region.
    ScatterMap(Common),
    /// Fading-averaged PSDs of SISO and array links.
    PsdCompare(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Ci,
    Paper,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out_dir: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    realizations: Option<usize>,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
}

fn resolve(kind: ExperimentKind, args: &Common) -> oobsim::Result<ExperimentConfig> {
    let profile = args.profile.map(|p| match p {
        ProfileArg::Ci => Profile::Ci,
        ProfileArg::Paper => Profile::Paper,
    });
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_path(kind, path, profile)?,
        None => ExperimentConfig::resolve(
            kind,
            &ConfigFile {
                schema_version: SCHEMA_VERSION,
                ..Default::default()
            },
            profile,
        )?,
    };
    if let Some(d) = &args.out_dir {
        config.out_dir = d.clone();
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(r) = args.realizations {
        config.num_realizations = r;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::LosPattern(a) => (ExperimentKind::LosPattern, a),
        Command::FadingCcdf(a) => (ExperimentKind::FadingCcdf, a),
        Command::ScatterMap(a) => (ExperimentKind::ScatterMap, a),
        Command::PsdCompare(a) => (ExperimentKind::PsdCompare, a),
    };
    let result = resolve(kind, args).and_then(|c| run(&c));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oobsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config_error() {
        2
    } else {
        3
    }
}
