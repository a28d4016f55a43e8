use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use envvuln::model::{Level, Resolution};
use envvuln::pipeline::{self, PipelineConfig};
use envvuln::{Error, Result};

/// Environmental-health vulnerability indices from region-by-time panels.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Pipeline config JSON. Optional for `synth`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config's `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    level: Option<Level>,
    /// Build only this resolution.
    #[arg(long, global = true)]
    resolution: Option<Resolution>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic input fixture with a ready-to-run config.json.
    Synth,
    /// Compute exposure indicator panels.
    Indicators,
    /// Compute mortality-correlation weights per index.
    Weights,
    /// Build every configured index at every configured resolution.
    Build,
    /// Decompose one region's index value at one time.
    Breakdown {
        #[arg(long)]
        index: String,
        #[arg(long)]
        region: String,
        /// Time label such as 2017, 2017-03 or 2017-W05.
        #[arg(long)]
        time: String,
    },
    /// Convert built index files to GeoJSON for map joins.
    Export,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::read(path)?,
        None if matches!(cli.command, Command::Synth) => {
            let mut cfg = PipelineConfig::default();
            cfg.set_base_dir(std::env::current_dir().map_err(|e| Error::InvalidInput(e.to_string()))?);
            cfg
        }
        None => return Err(Error::InvalidInput("--config is required".into())),
    };
    cfg.apply_overrides(cli.seed, cli.out.clone(), cli.level, cli.resolution)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let written = match &cli.command {
        Command::Synth => pipeline::cmd_synth(&cfg)?,
        Command::Indicators => pipeline::cmd_indicators(&cfg)?,
        Command::Weights => pipeline::cmd_weights(&cfg)?,
        Command::Build => pipeline::cmd_build(&cfg)?,
        Command::Export => pipeline::cmd_export(&cfg)?,
        Command::Breakdown { index, region, time } => {
            let (path, report) = pipeline::cmd_breakdown(&cfg, index, region, time)?;
            let _ = writeln!(std::io::stdout(), "{}", report.to_json());
            vec![path]
        }
    };
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
