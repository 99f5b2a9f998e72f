//! Parameter sweeps over the `qcrlab-core` models, driven by JSON configs
//! and written as CSV tables with a JSON sidecar of resolved parameters.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

pub use error::{CliError, Result};

use config::SweepConfig;
use table::Table;

/// JSON schema for config files.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");

/// Sidecar path next to a CSV output: `run.csv` → `run.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Reads a config, runs it and writes the table and sidecar. Nothing is
/// written unless every sweep point succeeded. Returns the CSV path.
pub fn execute(config_path: &Path, out: Option<&Path>, seed: u64) -> Result<PathBuf> {
    let text = fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let cfg = SweepConfig::from_json(&text)?;
    let out = match (out, &cfg.out_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(CliError::Config("out_path: missing (set it in the config or pass --out)".into())),
    };
    log::info!("running {} over {} points", cfg.command.name(), cfg.grid.len());
    let result = commands::run(&cfg, seed)?;
    let sidecar = commands::sidecar(&cfg, &result, seed);
    write_table(&out, &result.table)?;
    let side = sidecar_path(&out);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n";
    fs::write(&side, json).map_err(|e| CliError::io(&side, e))?;
    Ok(out)
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    fs::write(path, table.to_csv_string()).map_err(|e| CliError::io(path, e))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Table::parse(&text).map_err(|reason| CliError::Table {
        path: path.to_path_buf(),
        reason,
    })
}

/// Column-wise difference of two Lamb-shift tables on the same bias grid.
pub fn diff_lamb_files(a: &Path, b: &Path) -> Result<Table> {
    let (ta, tb) = (read_table(a)?, read_table(b)?);
    commands::diff_lamb(&ta, &tb).map_err(|reason| CliError::Table {
        path: b.to_path_buf(),
        reason,
    })
}
