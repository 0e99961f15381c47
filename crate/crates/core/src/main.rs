use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hetwsn::cli::{self, SweepParam};
use hetwsn::protocols::ProtocolKind;
use hetwsn::Result;

#[derive(Parser)]
#[command(name = "hetwsn", about = "Cluster-head election simulator for heterogeneous sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a configuration key, e.g. `--set m=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one protocol with one seed.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
    },
    /// Run LEACH, SEP and DBCP over a seed range.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Inclusive range `a..b` or a single seed.
        #[arg(long, default_value = "1..30")]
        seeds: String,
    },
    /// Compare the protocols at each value of one heterogeneity parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
}

fn load(common: &Common, extra: Vec<(String, toml::Value)>) -> Result<hetwsn::model::SimConfig> {
    let mut overrides = common
        .set
        .iter()
        .map(|raw| cli::parse_override(raw))
        .collect::<Result<Vec<_>>>()?;
    overrides.extend(extra);
    cli::parse_config(common.config.as_deref(), &overrides)
}

fn execute(command: Command) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Run { common, seed, protocol } => {
            let mut extra = Vec::new();
            if let Some(seed) = seed {
                extra.push(("seed".to_string(), toml::Value::Integer(seed as i64)));
            }
            if let Some(protocol) = protocol {
                extra.push(("protocol".to_string(), toml::Value::String(protocol.to_string())));
            }
            let config = load(&common, extra)?;
            cli::cmd_run(&config, &common.out, &mut stdout)?;
        }
        Command::Compare { common, seeds } => {
            let config = load(&common, Vec::new())?;
            cli::cmd_compare(&config, cli::parse_seeds(&seeds)?, &common.out, &mut stdout)?;
        }
        Command::Sweep {
            common,
            seeds,
            param,
            values,
        } => {
            let config = load(&common, Vec::new())?;
            let values = cli::parse_values(&values)?;
            cli::cmd_sweep(&config, param, &values, cli::parse_seeds(&seeds)?, &common.out, &mut stdout)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
