use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dsvgd_sim::config::{load_config, ExperimentConfig};
use dsvgd_sim::runner::{run_sweep, run_to_files};

#[derive(Parser)]
#[command(name = "dsvgd-sim", version, about = "Compressed particle-based federated learning and unlearning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config's run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment and write its trace and summary.
    Run(CommonArgs),
    /// Run every cell of the config's [sweep] section.
    Sweep(CommonArgs),
    /// Parse and validate a config, printing the resolved settings.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit 1: config could not be parsed or validated. Exit 2: runtime failure.
fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type CliResult = std::result::Result<(), (u8, String)>;

fn load(args_config: &PathBuf, seed: Option<u64>) -> std::result::Result<ExperimentConfig, (u8, String)> {
    let mut cfg = load_config(args_config).map_err(|e| (1, e.to_string()))?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Run(args) => {
            let cfg = load(&args.config, args.seed)?;
            let out_dir = args
                .out
                .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let (trace, summary) =
                run_to_files(&cfg, &out_dir).map_err(|e| (2, e.to_string()))?;
            if !args.quiet {
                println!("trace:   {}", trace.display());
                println!("summary: {}", summary.display());
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let cfg = load(&args.config, args.seed)?;
            if cfg.sweep.is_none() {
                return Err((1, "config has no [sweep] section".to_string()));
            }
            let out_dir = args
                .out
                .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let cells = run_sweep(&cfg, &out_dir).map_err(|e| (2, e.to_string()))?;
            if !args.quiet {
                for cell in &cells {
                    match &cell.status {
                        Ok(s) => println!(
                            "value {} ok: accuracy {:.4}, ece {:.4}, bits {}",
                            cell.value,
                            s.result.final_accuracy,
                            s.result.final_ece,
                            s.result.total_bits
                        ),
                        Err(e) => println!("value {} failed: {e}", cell.value),
                    }
                }
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load(&config, None)?;
            print!("{}", cfg.to_toml_string());
            Ok(())
        }
    }
}
