//! Command-line front end: TOML run configurations in, CSV/JSON artifacts
//! and a hashed manifest out.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure, 3 failed
//! consistency check.

pub mod config;
pub mod manifest;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{RunConfig, SystemSpec};
pub use manifest::{sha256_hex, ArtifactDir, ArtifactEntry, Manifest, MANIFEST_NAME};
pub use run::{run, Command};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "qpoincare", version, about = "Poincaré-section transfer operators and resonances")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub verbose: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        1
    } else if e.is_consistency() {
        3
    } else {
        2
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(m) => {
            log::info!("{} artifacts written", m.artifacts.len());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> crate::Result<Manifest> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("{}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", cli.config.display())),
        other => other,
    })?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
    match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(n) => {
            // a pool built earlier in this process stays in place
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        None => {}
    }
    run(cli.command, &cfg, &text, &out)
}
