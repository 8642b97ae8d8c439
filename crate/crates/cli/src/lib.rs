//! Command-line driver: JSON scenario configs in, CSV scans and JSON reports out.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::{config_hash, run, Output};
pub use config::{Mode, ScenarioConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "covcd", version, about = "Correlation-disturbance scans, calibration and detector reports")]
pub struct Cli {
    /// Scenario config (JSON, schema covcd-config/1).
    #[arg(long)]
    pub config: PathBuf,
    /// Output path. Table modes also write `<out>.json`. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Forces exact probabilities instead of sampled shots.
    #[arg(long)]
    pub exact: bool,
}

impl Cli {
    /// Loads the config and applies flag overrides.
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.exact {
            cfg.shots = config::Shots::Exact;
            cfg.shots_alone = None;
        }
        Ok(cfg)
    }
}

/// `<out>.json`, next to the table.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Runs the CLI end to end and writes its outputs.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.resolve()?;
    let base = cli.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = run(&cfg, &base)?;
    match (&cli.out, &out.csv) {
        (Some(path), Some(table)) => {
            std::fs::write(path, table)?;
            std::fs::write(sidecar_path(path), json_text(&out.json))?;
        }
        (Some(path), None) => std::fs::write(path, json_text(&out.json))?,
        (None, Some(table)) => std::io::stdout().write_all(table.as_bytes())?,
        (None, None) => std::io::stdout().write_all(json_text(&out.json).as_bytes())?,
    }
    Ok(())
}
