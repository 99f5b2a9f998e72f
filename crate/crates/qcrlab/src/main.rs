use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcrlab::{diff_lamb_files, execute, write_table, CliError, CONFIG_SCHEMA};

/// Run a parameter sweep described by a JSON config.
#[derive(Debug, Parser)]
#[command(version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Sweep config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output CSV; overrides `out_path` in the config. The sidecar is
    /// written next to it with a `.json` extension.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Seed for synthetic measurement noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Option<Tool>,
}

#[derive(Debug, Subcommand)]
enum Tool {
    /// Difference of the `lamb_shift` columns of two tables, a − b.
    DiffLamb {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the config JSON schema.
    Schema,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Some(Tool::DiffLamb { a, b, out }) => {
            let t = diff_lamb_files(&a, &b)?;
            write_table(&out, &t)
        }
        Some(Tool::Schema) => {
            print!("{CONFIG_SCHEMA}");
            Ok(())
        }
        None => {
            let config = cli
                .config
                .ok_or_else(|| CliError::Config("--config is required".into()))?;
            let out = execute(&config, cli.out.as_deref(), cli.seed)?;
            log::info!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QCRLAB_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
