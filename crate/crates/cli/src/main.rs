//! Scenario-driven front end: parse a TOML config, dispatch to the solvers
//! and simulators, emit CSV. Exit codes: 0 ok, 1 compute error, 2 config
//! error.

mod commands;
mod config;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ScenarioConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl From<refmarket::Error> for CliError {
    fn from(e: refmarket::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "refmarket", version, about = "Referral labor market solver and simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    /// Scenario config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent); written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for the agent-based simulator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run the invariant suite against the scenario before the command;
    /// nonzero exit on failure.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the one-period equilibrium at the configured initial state.
    Equilibrium,
    /// Simulate the period map and emit a trajectory CSV.
    Dynamics {
        /// Grid override `key=a:b:step`; emits one first-period row per value.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Iterate to a steady state with cycle diagnostics.
    Steady {
        /// Additional deterministic random starts.
        #[arg(long, default_value_t = 0)]
        starts: usize,
    },
    /// Affirmative-action run; `--compare-baseline` pairs it against the
    /// undisturbed trajectory.
    Policy {
        #[arg(long)]
        compare_baseline: bool,
    },
    /// Two-threshold firing equilibrium at the configured lambda.
    Firing {
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Firm-removal shock at the configured kappa.
    #[command(name = "macro")]
    MacroCmd {
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Agent-based simulation; `--compare-baseline` pairs the configured
    /// mode against myopic behavior.
    Abm {
        #[arg(long)]
        compare_baseline: bool,
    },
    /// Run another subcommand over a parameter grid, in parallel.
    Sweep {
        /// One of: equilibrium, dynamics, firing, macro.
        #[arg(long)]
        target: String,
        /// Grid spec `key=a:b:step`.
        #[arg(long)]
        param: String,
    },
    /// Run the invariant suite against the configured scenario.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let scenario = ScenarioConfig::load(config_path)?;
    let meta = refmarket::report::CsvMeta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: refmarket::report::fnv1a64(&scenario.raw),
    };

    if cli.check {
        commands::check(&scenario)?;
    }
    let output = match &cli.cmd {
        Command::Equilibrium => commands::equilibrium(&scenario, &meta)?,
        Command::Dynamics { sweep } => match sweep {
            None => commands::dynamics(&scenario, &meta)?,
            Some(spec) => sweep::run(&scenario, &meta, "dynamics", spec)?,
        },
        Command::Steady { starts } => commands::steady(&scenario, &meta, *starts)?,
        Command::Policy { compare_baseline } => {
            commands::policy(&scenario, &meta, *compare_baseline)?
        }
        Command::Firing { sweep } => match sweep {
            None => commands::firing(&scenario, &meta, None)?,
            Some(spec) => sweep::run(&scenario, &meta, "firing", spec)?,
        },
        Command::MacroCmd { sweep } => match sweep {
            None => commands::macro_shock(&scenario, &meta, None)?,
            Some(spec) => sweep::run(&scenario, &meta, "macro", spec)?,
        },
        Command::Abm { compare_baseline } => {
            commands::abm(&scenario, &meta, cli.seed, *compare_baseline)?
        }
        Command::Sweep { target, param } => sweep::run(&scenario, &meta, target, param)?,
        Command::Check => commands::check(&scenario)?,
    };

    write_output(cli.out.as_deref(), &output)
}

/// Write to stdout, or atomically to the target path (temp file + rename).
fn write_output(out: Option<&std::path::Path>, data: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{data}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().unwrap_or(std::path::Path::new("."));
            let tmp = dir.join(format!(
                ".{}.tmp-{}",
                path.file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "out".into()),
                std::process::id()
            ));
            std::fs::write(&tmp, data)
                .map_err(|e| CliError::Compute(format!("write {}: {e}", tmp.display())))?;
            std::fs::rename(&tmp, path)
                .map_err(|e| CliError::Compute(format!("rename to {}: {e}", path.display())))
        }
    }
}
