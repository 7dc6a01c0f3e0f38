mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Command, Format, RunConfig};

/// SINR distribution, outage and BER for MIMO MMSE/ZF receivers.
#[derive(Parser)]
#[command(name = "sinrld", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Saddle-point density on a γ grid.
    Pdf(Common),
    /// Outage probability on a γ grid.
    Cdf(Common),
    /// Average BER over a p0 sweep, analytic and Monte Carlo.
    Ber(Common),
    /// Monte Carlo histogram, moments and generalized-Gamma fit.
    Mc(Common),
    /// Joined table of all densities and CDFs on one grid.
    Compare(Common),
    /// Runs the internal-consistency suite.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Exit with status 1 if any check fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads; does not change results.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn resolve(cmd: Command, args: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(c) = cfg.command {
        if c != cmd {
            bail!("config key 'command' = \"{}\" conflicts with subcommand '{}'", c.name(), cmd.name());
        }
    }
    cfg.command = Some(cmd);
    if let Some(s) = args.seed {
        cfg.mc.seed = s;
    }
    if let Some(n) = args.samples {
        cfg.mc.samples = n;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    match args.format {
        Some(FormatArg::Csv) => cfg.output.format = Format::Csv,
        Some(FormatArg::Json) => cfg.output.format = Format::Json,
        None => {
            if cfg.output.path.as_deref().is_some_and(|p| p.ends_with(".json")) {
                cfg.output.format = Format::Json;
            }
        }
    }
    cfg.check()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (cmd, args, strict) = match &cli.command {
        Cmd::Pdf(a) => (Command::Pdf, a, false),
        Cmd::Cdf(a) => (Command::Cdf, a, false),
        Cmd::Ber(a) => (Command::Ber, a, false),
        Cmd::Mc(a) => (Command::Mc, a, false),
        Cmd::Compare(a) => (Command::Compare, a, false),
        Cmd::Validate { common, strict } => (Command::Validate, common, *strict),
    };
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = resolve(cmd, args)?;
    let outcome = commands::run(cmd, &cfg)?;
    let text = output::render(&outcome.table, cmd.name(), &cfg, cfg.output.format);
    output::write(&text, cfg.output.path.as_deref())?;
    Ok(if strict && outcome.failures > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
