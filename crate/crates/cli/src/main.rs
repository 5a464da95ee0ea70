//! Command-line front end for the joint space-time coding link simulator.

mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "ris-stc", version, about = "RIS joint space-time coding link simulator")]
struct Cli {
    /// Experiment configuration file (TOML); defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Disable channel noise (infinite SNR)
    #[arg(long, global = true)]
    no_noise: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steered and uniform power patterns plus the beamforming gain
    Pattern,
    /// Beam scan over the configured target angles
    Scan,
    /// Full link with and without beamforming at the configured SNR
    Link,
    /// BER-vs-SNR sweep per modulation order and coding
    Ber,
    /// Generate a joint control schedule file from the payload
    Codegen {
        /// Payload as a '0'/'1' string (overrides the config payload)
        #[arg(long)]
        payload_bits: Option<String>,
    },
    /// Verify a schedule file and recover its payload
    Codecheck {
        /// Schedule file written by codegen
        schedule: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();

    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.link.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&out)?;

    match &cli.command {
        Command::Pattern => commands::run_pattern(&cfg, &out)?,
        Command::Scan => commands::run_scan(&cfg, &out)?,
        Command::Link => commands::run_link_cmd(&cfg, &out, cli.no_noise)?,
        Command::Ber => commands::run_ber(&cfg, &out, cli.no_noise)?,
        Command::Codegen { payload_bits } => {
            commands::run_codegen(&cfg, &out, payload_bits.as_deref())?;
        }
        Command::Codecheck { schedule } => {
            commands::run_codecheck(schedule)?;
        }
    }
    Ok(())
}
