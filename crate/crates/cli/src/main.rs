//! `conflat` command-line driver.

mod commands;
mod config;
mod kernels;
mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::Output;
use crate::config::{read_json, Form, OrderConfig, RunConfig};
use crate::suites::Suite;

#[derive(Parser)]
#[command(name = "conflat", version, about = "Kernels on conformally flat quotient manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one kernel value.
    Eval(KernelArgs),
    /// Evaluate the kernel at seeded sample pairs and write CSV.
    Table(KernelArgs),
    /// Evaluate at a list of truncation radii and write CSV.
    Converge {
        #[command(flatten)]
        args: KernelArgs,
        /// Comma-separated truncation radii.
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
    },
    /// Run a verification suite; exit 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Order of an isolated zero of a map.
    Order {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the report-only probes.
    Probe,
}

#[derive(clap::Args)]
struct KernelArgs {
    #[arg(long)]
    config: PathBuf,
    /// Truncation radius; overrides the config.
    #[arg(long = "R")]
    radius: Option<usize>,
    /// Kernel form; overrides the config.
    #[arg(long, value_enum)]
    form: Option<Form>,
}

enum Failure {
    Config(anyhow::Error),
    Io(anyhow::Error),
}

fn load(args: &KernelArgs) -> Result<(RunConfig, usize, Form), Failure> {
    let cfg: RunConfig = read_json(&args.config).map_err(Failure::Config)?;
    let radius = args.radius.unwrap_or(cfg.radius);
    let form = args.form.unwrap_or(cfg.form);
    Ok((cfg, radius, form))
}

fn emit(out: Option<&Path>, output: &Output) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, &output.bytes)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io),
        None => std::io::stdout().write_all(&output.bytes).context("writing stdout").map_err(Failure::Io),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")
            .map_err(Failure::Config)?;
    }
    let (output, config_out) = match &cli.command {
        Command::Eval(args) => {
            let (cfg, r, form) = load(args)?;
            (commands::eval(&cfg, r, form).map_err(Failure::Config)?, cfg.out)
        }
        Command::Table(args) => {
            let (cfg, r, form) = load(args)?;
            (commands::table(&cfg, r, form).map_err(Failure::Config)?, cfg.out)
        }
        Command::Converge { args, radii } => {
            let (cfg, _, form) = load(args)?;
            let radii = if !radii.is_empty() {
                radii.clone()
            } else if !cfg.radii.is_empty() {
                cfg.radii.clone()
            } else {
                vec![5, 10, 20, 40]
            };
            (commands::converge(&cfg, &radii, form).map_err(Failure::Config)?, cfg.out)
        }
        Command::Verify { suite, seed } => {
            let checks = suites::run(*suite, *seed).map_err(Failure::Config)?;
            let mut report = json!({
                "version": conflat::VERSION,
                "command": "verify",
                "config": {"suite": suite, "seed": seed},
                "checks": checks,
            });
            let passed = checks.iter().all(|c| c.passed);
            if *suite == Suite::Probes {
                report["probes"] = commands::probe().map_err(Failure::Config)?;
            }
            report["passed"] = json!(passed);
            (Output::json(&report, passed).map_err(Failure::Io)?, None)
        }
        Command::Order { config } => {
            let cfg: OrderConfig = read_json(config).map_err(Failure::Config)?;
            (commands::order(&cfg).map_err(Failure::Config)?, cfg.out)
        }
        Command::Probe => {
            let report = json!({
                "version": conflat::VERSION,
                "command": "probe",
                "config": {},
                "probes": commands::probe().map_err(Failure::Config)?,
            });
            (Output::json(&report, true).map_err(Failure::Io)?, None)
        }
    };
    let out = cli.out.or(config_out.map(PathBuf::from));
    emit(out.as_deref(), &output)?;
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
