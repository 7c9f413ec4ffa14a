use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use parabolic_lag::analysis::list_checks;
use parabolic_lag::experiment::{run_config, ExperimentConfig};

#[derive(Parser)]
#[command(name = "plag", version, about = "Run parabolic-lag experiment configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every task of a configuration and write its reports.
    Run {
        config: PathBuf,
        /// Output directory; overrides the configuration's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tasks run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the registered checks.
    ListChecks,
}

fn run(config: PathBuf, out: Option<PathBuf>, jobs: usize) -> anyhow::Result<bool> {
    let cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    let out = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let summary = run_config(&cfg, &out, jobs)?;
    for r in &summary.records {
        println!("{:<6} {:<32} {}", if r.pass { "pass" } else { "FAIL" }, r.name, r.value);
    }
    Ok(summary.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks => {
            print!("{}", list_checks());
            ExitCode::SUCCESS
        }
        Command::Run { config, out, jobs } => match run(config, out, jobs) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
