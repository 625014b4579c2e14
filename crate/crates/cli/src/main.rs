mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ppdrsim_core::scenario::{run_scenario, scenario_metrics};
use ppdrsim_core::sweep::{oracle_ber, run_ber_sweep, OracleKind};
use ppdrsim_core::SimError;

use config::{load_run_config, OutputFormat, RunCommand};

#[derive(Debug, Parser)]
#[command(
    name = "ppdrsim",
    version,
    about = "BER sweeps for two-way relaying and disaster-scenario simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo BER sweep over Eb/N0.
    Ber(RunArgs),
    /// Run the time-stepped disaster scenario.
    Scenario(RunArgs),
    /// Print a closed-form BER reference value.
    Oracle {
        /// One of: bpsk-awgn, bpsk-rayleigh, bpsk-dual-mrc-rayleigh.
        kind: String,
        /// Eb/N0 in dB.
        ebn0_db: f64,
    },
}

#[derive(Debug, Args, Clone)]
struct RunArgs {
    /// TOML config file; omitted fields take documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent workers; never changes the numbers produced.
    #[arg(long)]
    workers: Option<usize>,
    /// Output format; overrides the config file.
    #[arg(long)]
    format: Option<String>,
}

/// Failure modes mapped onto process exit codes: configuration problems
/// exit 1, runtime problems exit 2.
#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(msg) => CliError::Config(msg),
            SimError::InvalidArgument(msg) => CliError::Runtime(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ber(args) => cmd_ber(&args),
        Command::Scenario(args) => cmd_scenario(&args),
        Command::Oracle { kind, ebn0_db } => cmd_oracle(&kind, ebn0_db),
    }
}

fn read_config_bytes(args: &RunArgs) -> Result<Option<String>, CliError> {
    match &args.config {
        None => Ok(None),
        Some(path) => std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display()))),
    }
}

fn write_output(path: Option<&PathBuf>, contents: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| CliError::Runtime(format!("writing stdout: {e}")))
        }
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display()))),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn cmd_ber(args: &RunArgs) -> Result<(), CliError> {
    let file = read_config_bytes(args)?;
    let run_cfg = load_run_config(
        RunCommand::Ber,
        file.as_deref(),
        args.seed,
        args.format.as_deref(),
        args.out.clone(),
    )
    .map_err(CliError::from)?;
    let workers = match args.workers {
        None => default_workers(),
        Some(0) => return Err(CliError::Config("workers must be >= 1".into())),
        Some(n) => n,
    };

    let sweep = run_cfg.sweep.expect("ber command always builds a sweep");
    let mut points = run_ber_sweep(&sweep, workers)?;
    points.sort_by(|a, b| {
        a.protocol
            .name()
            .cmp(b.protocol.name())
            .then(a.ebn0_db.partial_cmp(&b.ebn0_db).expect("finite grid"))
    });

    let rendered = match run_cfg.format {
        OutputFormat::Csv => output::ber_csv(run_cfg.seed, &points),
        OutputFormat::Jsonl => output::ber_jsonl(run_cfg.seed, &points)
            .map_err(|e| CliError::Runtime(format!("serializing results: {e}")))?,
    };
    write_output(run_cfg.out.as_ref(), &rendered)
}

fn cmd_scenario(args: &RunArgs) -> Result<(), CliError> {
    let file = read_config_bytes(args)?;
    let run_cfg = load_run_config(
        RunCommand::Scenario,
        file.as_deref(),
        args.seed,
        args.format.as_deref(),
        args.out.clone(),
    )
    .map_err(CliError::from)?;

    let scenario = run_cfg
        .scenario
        .expect("scenario command always builds a scenario");
    let states = run_scenario(&scenario)?;
    let report = scenario_metrics(states.last().expect("duration >= 1"));
    let rendered = output::scenario_jsonl(run_cfg.seed, &states, &report)
        .map_err(|e| CliError::Runtime(format!("serializing trace: {e}")))?;
    write_output(run_cfg.out.as_ref(), &rendered)
}

fn cmd_oracle(kind: &str, ebn0_db: f64) -> Result<(), CliError> {
    let kind = OracleKind::from_str(kind).map_err(|e| CliError::Config(e.to_string()))?;
    let value = oracle_ber(kind, ebn0_db).map_err(|e| CliError::Config(e.to_string()))?;
    println!("{}", output::fmt_sig10(value));
    Ok(())
}
