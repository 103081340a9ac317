use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mar_cli::commands::{rerun, run, Command};
use mar_cli::config::{RunConfig, KEYS};

/// Bayesian analysis of mixture autoregressive models.
#[derive(Parser)]
#[command(name = "mar", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a path from Model A, Model B or a user-specified model.
    Simulate(RunArgs),
    /// Fit a model with fixed orders and write draws and summaries.
    Fit(RunArgs),
    /// Estimate the evidence for each number of components.
    Select(RunArgs),
    /// Posterior-averaged predictive densities from a draws file.
    Forecast(RunArgs),
    /// Consistency study over simulated Model A datasets.
    Replicate(RunArgs),
    /// Rerun the command recorded in a manifest.
    Rerun {
        manifest: PathBuf,
        /// Output directory for the rerun.
        #[arg(long)]
        output: PathBuf,
    },
    /// List every configuration key.
    Keys,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; may be repeated. Applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config.apply_text(&text)?;
        }
        for s in &self.set {
            config.apply_assignment(s)?;
        }
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Select(a) => (Command::Select, a),
        Cmd::Forecast(a) => (Command::Forecast, a),
        Cmd::Replicate(a) => (Command::Replicate, a),
        Cmd::Rerun { manifest, output } => {
            let m = rerun(&manifest, &output)?;
            report(&m);
            return Ok(());
        }
        Cmd::Keys => {
            for (key, help) in KEYS {
                println!("{key:<16} {help}");
            }
            return Ok(());
        }
    };
    let manifest = run(command, args.load()?)?;
    report(&manifest);
    Ok(())
}

fn report(m: &mar_cli::RunManifest) {
    for w in &m.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} finished in {:.2}s; wrote {}", m.command, m.wall_clock_seconds, m.outputs.join(", "));
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
