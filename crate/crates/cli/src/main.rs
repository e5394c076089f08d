use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use repeater_cli::run::{cmd_export, cmd_keyrate, cmd_optimize, cmd_oracle_check, cmd_sweep, Options};
use repeater_cli::{parse_config, CliError, Result, RunConfig};

#[derive(Parser)]
#[command(name = "repeater", version, about = "Optimize near-deterministic repeater-chain schemes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize the configured chain and write its frontier.
    Optimize,
    /// Optimize every point of the configured parameter grid.
    Sweep,
    /// Compare the heuristic with exhaustive search on a small chain.
    OracleCheck,
    /// Frontier with six-state secret-key rates.
    Keyrate,
    /// Write graph text and a record for frontier schemes.
    ExportScheme {
        /// Scheme id, e.g. n4-p2-f31; repeatable. Default: all.
        #[arg(long = "id")]
        ids: Vec<String>,
        /// Read schemes from a schemes file instead of optimizing.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

fn load(path: &Option<PathBuf>) -> Result<Option<(RunConfig, Vec<u8>)>> {
    let Some(path) = path else { return Ok(None) };
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    Ok(Some((parse_config(&text)?, bytes)))
}

fn main_inner(cli: Cli) -> Result<String> {
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be >= 1".into()));
    }
    let loaded = load(&cli.config)?;
    let opts = Options {
        out: cli.out,
        workers: cli.workers,
        config_bytes: loaded.as_ref().map(|l| l.1.clone()).unwrap_or_default(),
    };
    let cfg = loaded.as_ref().map(|l| &l.0);
    if let Cmd::ExportScheme { ids, from } = &cli.cmd {
        return cmd_export(cfg, from.as_deref(), ids, &opts);
    }
    let cfg = cfg.ok_or_else(|| CliError::Usage("--config is required".into()))?;
    match cli.cmd {
        Cmd::Optimize => cmd_optimize(cfg, &opts),
        Cmd::Sweep => cmd_sweep(cfg, &opts),
        Cmd::OracleCheck => cmd_oracle_check(cfg, &opts),
        Cmd::Keyrate => cmd_keyrate(cfg, &opts),
        Cmd::ExportScheme { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
