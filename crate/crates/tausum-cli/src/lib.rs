//! The `tausum` command line: reports over the divisor-sum library.
//!
//! Every run resolves to a [`config::RunConfig`], executes one command, and
//! renders a CSV or JSON report.  With `--out` the report goes to a file and
//! a `<out>.manifest.json` records the resolved configuration, so any run
//! can be replayed byte-for-byte with `tausum rerun <manifest>`.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 a precision
//! target was unattainable, 3 a size cap was exceeded, 64 usage errors,
//! 74 I/O errors.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

use config::{manifest_path, resolve, Cli, CommandKind, CommandLine, Manifest, RunConfig};
use error::CliError;

/// Parse arguments and run; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    64
                }
            };
        }
    };

    let cfg = match build_config(cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };

    match run_config(&cfg) {
        Ok(None) => 0,
        Ok(Some(reason)) => {
            eprintln!("FAIL: {reason}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Turn the parsed command line into a resolved config.  `rerun` loads the
/// recorded config from a manifest instead of resolving flags.
fn build_config(command: CommandLine) -> Result<RunConfig, CliError> {
    match command {
        CommandLine::Constants(args) => resolve(CommandKind::Constants, &args),
        CommandLine::Gregory(args) => resolve(CommandKind::Gregory, &args),
        CommandLine::VerifySieve(args) => resolve(CommandKind::VerifySieve, &args),
        CommandLine::Sums(args) => resolve(CommandKind::Sums, &args),
        CommandLine::BoundReport(args) => resolve(CommandKind::BoundReport, &args),
        CommandLine::MaintermCheck(args) => resolve(CommandKind::MaintermCheck, &args),
        CommandLine::Rerun(args) => {
            let text = std::fs::read_to_string(&args.manifest)?;
            let manifest: Manifest = serde_json::from_str(&text)?;
            if manifest.crate_version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {}",
                    manifest.crate_version,
                    env!("CARGO_PKG_VERSION"),
                );
            }
            let mut cfg = manifest.config;
            if let Some(out) = args.out {
                cfg.out = Some(out);
            }
            Ok(cfg)
        }
    }
}

/// Execute a resolved run.  The report is written to `--out` (with its
/// manifest beside it) or printed to stdout.  `Ok(Some(reason))` means the
/// run completed but a verification check failed: exit code 1.
pub fn run_config(cfg: &RunConfig) -> Result<Option<String>, CliError> {
    let clock = Instant::now();
    let exec = commands::execute(cfg)?;
    let wall_time_ms = clock.elapsed().as_millis() as u64;

    match &cfg.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, &exec.rendered)?;
            let manifest = Manifest {
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                config: cfg.clone(),
                wall_time_ms,
                cache: exec.cache.clone(),
            };
            let mut text = serde_json::to_string_pretty(&manifest)?;
            text.push('\n');
            std::fs::write(manifest_path(path), text)?;
        }
        None => print!("{}", exec.rendered),
    }

    Ok(exec.failure)
}
