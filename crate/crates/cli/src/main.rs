use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amm_track::config::{allowed_keys, parse_assignment, Command, Layers, RunConfig};
use amm_track::{commands, CliError};

/// Block-scale AMM price-tracking experiments.
#[derive(Debug, Parser)]
#[command(name = "amm-track", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Reduced tracking model (presets: strong, baseline, weak).
    SimulateReduced(Common),
    /// Constant-product mechanism (presets: baseline, shallow, deep).
    SimulateCpmm(Common),
    /// Grid sweep over (lambda, p) or (depth, cost).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// reduced | cpmm
        #[arg(long)]
        target: Option<String>,
    },
    /// Calibration report from an observation CSV.
    Calibrate {
        #[command(flatten)]
        common: Common,
        input: Option<PathBuf>,
    },
    /// Contraction certificate for one service pair.
    Certify(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Override one key, e.g. `--set lambda=0.4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn layers(command: Command, common: &Common, extra: Vec<(String, String)>) -> Result<Layers, CliError> {
    let mut flags = common
        .set
        .iter()
        .map(|s| parse_assignment(s))
        .collect::<Result<Vec<_>, _>>()?;
    flags.extend(extra);
    if let Some(seed) = common.seed {
        flags.push(("seed".into(), seed.to_string()));
    }
    if let Some(f) = &common.format {
        flags.push(("format".into(), f.clone()));
    }
    // every key any target accepts; unknown ones are rejected later
    let mut keys = allowed_keys(command, Some("cpmm"));
    keys.extend(allowed_keys(command, Some("reduced")));
    keys.sort_unstable();
    keys.dedup();
    Ok(Layers {
        preset: common.preset.clone(),
        file: common.config.clone(),
        env: Layers::env_from_process(&keys),
        flags,
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (command, common, extra) = match cli.command {
        Cmd::SimulateReduced(c) => (Command::SimulateReduced, c, vec![]),
        Cmd::SimulateCpmm(c) => (Command::SimulateCpmm, c, vec![]),
        Cmd::Sweep { common, target } => (
            Command::Sweep,
            common,
            target.map(|t| vec![("target".to_string(), t)]).unwrap_or_default(),
        ),
        Cmd::Calibrate { common, input } => (
            Command::Calibrate,
            common,
            input
                .map(|p| vec![("input".to_string(), p.display().to_string())])
                .unwrap_or_default(),
        ),
        Cmd::Certify(c) => (Command::Certify, c, vec![]),
    };
    let config = RunConfig::resolve(command, &layers(command, &common, extra)?)?;
    commands::run(&config, &common.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("amm-track: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
