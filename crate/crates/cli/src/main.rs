mod bundle;
mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::bundle::{config_hash, Bundle, Manifest};
use crate::commands::{Command, Context};
use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};

/// Environment variable overriding the default output directory.
const OUT_ENV: &str = "XTALK_LAB_OUT";
const DEFAULT_OUT: &str = "xtalk-out";

#[derive(Parser)]
#[command(
    name = "xtalk-lab",
    version,
    about = "Crosstalk characterisation and error-budget runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Drive-line crosstalk from Rabi-rate slopes.
    XyXtalk(RunArgs),
    /// Static flux crosstalk from avoided-crossing spectroscopy.
    DcFlux(RunArgs),
    /// Oscillating flux crosstalk from Ramsey fringe shifts.
    AcFlux(RunArgs),
    /// Projected gate error versus array size.
    GateErrorScaling(RunArgs),
    /// Linear distance model fitted to a crosstalk dataset.
    DistanceFit(RunArgs),
    /// Summary statistics and histogram of a crosstalk dataset.
    IngestStats(RunArgs),
    /// Direct crosstalk and drive rates from capacitance tables.
    Capacitive(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the bundle; the bundle is `<out>/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::XyXtalk(a) => (Command::XyXtalk, a),
            Sub::DcFlux(a) => (Command::DcFlux, a),
            Sub::AcFlux(a) => (Command::AcFlux, a),
            Sub::GateErrorScaling(a) => (Command::GateErrorScaling, a),
            Sub::DistanceFit(a) => (Command::DistanceFit, a),
            Sub::IngestStats(a) => (Command::IngestStats, a),
            Sub::Capacitive(a) => (Command::Capacitive, a),
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn execute(command: Command, args: RunArgs) -> CliResult<PathBuf> {
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(CliError::Schema("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Physics(format!("thread pool: {e}")))?;
    }
    let loaded = LoadedConfig::load(&args.config)?;
    let out_root = args
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let started = now();
    let ctx = Context {
        loaded: &loaded,
        config_sha256: config_hash(&loaded.raw),
        created_utc: started.clone(),
    };
    log::info!("{} with config {}", command.name(), args.config.display());
    let mut bundle = Bundle::create(&out_root.join(command.name()))?;
    bundle.write_bytes("config.toml", &loaded.raw)?;
    commands::run(command, &ctx, &mut bundle)?;
    let manifest = Manifest {
        command: command.name().into(),
        config_sha256: ctx.config_sha256.clone(),
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        started_utc: started,
        finished_utc: now(),
        files: bundle.files().to_vec(),
    };
    let path = bundle.commit(&manifest)?;
    log::info!("wrote {} files to {}", manifest.files.len() + 1, path.display());
    Ok(path)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Schema(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let (command, args) = cli.command.split();
    match execute(command, args) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
