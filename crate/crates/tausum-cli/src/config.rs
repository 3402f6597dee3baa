//! Argument parsing and configuration resolution.
//!
//! A run is described by a [`RunConfig`]: the command plus every knob that
//! can influence it.  Values are resolved in precedence order — explicit
//! flags, then the optional `key=value` config file, then environment
//! variables (`TAUSUM_CACHE_DIR`, `TAUSUM_X_CAP`), then built-in defaults.
//! The resolved config is what gets recorded in the run manifest, so a
//! manifest replay sees exactly the values the original run used.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tausum::sums;

use crate::error::CliError;

pub const ENV_CACHE_DIR: &str = "TAUSUM_CACHE_DIR";
pub const ENV_X_CAP: &str = "TAUSUM_X_CAP";

pub const DEFAULT_WORKERS: usize = 1;
pub const DEFAULT_PRIME_CUTOFF: u64 = 10_000;
pub const DEFAULT_DIGITS: u32 = 12;
pub const DEFAULT_SERIES_ORDER: usize = 12;
pub const DEFAULT_GREGORY_LEN: usize = 32;

#[derive(Parser, Debug)]
#[command(
    name = "tausum",
    version,
    about = "Divisor-sum experiments over shifted primes: constants, sieve checks, checkpointed sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandLine,
}

#[derive(Subcommand, Debug)]
pub enum CommandLine {
    /// Analytic constants: K, β(a), K(a), a₀ and the Titchmarsh constant.
    Constants(CommonArgs),
    /// Reciprocal-logarithm series coefficients and their partial sums.
    Gregory(CommonArgs),
    /// Sieve-weight identity, recursion and diagnostic checks at (a, z).
    VerifySieve(CommonArgs),
    /// Checkpointed divisor sums (phi, titchmarsh, twin, tau-recip, ...).
    Sums(CommonArgs),
    /// Prime reciprocal sums compared against their analytic ceiling.
    BoundReport(CommonArgs),
    /// Restricted divisor sums compared against the expansion main term.
    MaintermCheck(CommonArgs),
    /// Re-execute a recorded run from its manifest file.
    Rerun(RerunArgs),
}

/// The full flag surface.  Each command reads the subset it documents and
/// ignores the rest; unused flags are harmless.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Shift a (phi, twin, titchmarsh, constants, bound-report).
    /// titchmarsh additionally accepts -1.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<i64>,
    /// Summation limit x (sums, bound-report, mainterm-check).
    #[arg(long)]
    pub x: Option<u64>,
    /// Sieve level z (verify-sieve).
    #[arg(long)]
    pub z: Option<u64>,
    /// Expansion order (mainterm-check) or series length (gregory).
    #[arg(long)]
    pub m: Option<usize>,
    /// Sum kind for `sums`.
    #[arg(long, value_enum)]
    pub kind: Option<KindSpec>,
    /// Modulus d (coprime-restricted, progression, mainterm-check).
    #[arg(long)]
    pub d: Option<u64>,
    /// Residue r for progression sums.
    #[arg(long)]
    pub residue: Option<u64>,
    /// Worker threads for the summation engine (results are identical for
    /// any count).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Euler products truncate at primes ≤ this (constants, bound-report,
    /// mainterm-check).
    #[arg(long)]
    pub prime_cutoff: Option<u64>,
    /// Tail-expansion order for truncated products and sums (4..=24).
    #[arg(long)]
    pub series_order: Option<usize>,
    /// Decimal digits the constants run must certify.
    #[arg(long)]
    pub digits: Option<u32>,
    /// Comma-separated checkpoint positions (default: powers of ten up to x).
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Write the report here instead of stdout; a `.manifest.json` with the
    /// resolved config is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cache directory for summation runs (env TAUSUM_CACHE_DIR).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Optional key=value config file; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    /// Manifest file written by a previous run.
    pub manifest: PathBuf,
    /// Redirect the replayed output to a different file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (csv or json)")),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindSpec {
    Phi,
    Titchmarsh,
    Twin,
    TauRecip,
    CoprimeRestricted,
    Progression,
}

impl FromStr for KindSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<KindSpec, String> {
        match s {
            "phi" => Ok(KindSpec::Phi),
            "titchmarsh" => Ok(KindSpec::Titchmarsh),
            "twin" => Ok(KindSpec::Twin),
            "tau-recip" => Ok(KindSpec::TauRecip),
            "coprime-restricted" => Ok(KindSpec::CoprimeRestricted),
            "progression" => Ok(KindSpec::Progression),
            other => Err(format!("unknown sum kind {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Constants,
    Gregory,
    VerifySieve,
    Sums,
    BoundReport,
    MaintermCheck,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CommandKind::Constants => "constants",
            CommandKind::Gregory => "gregory",
            CommandKind::VerifySieve => "verify-sieve",
            CommandKind::Sums => "sums",
            CommandKind::BoundReport => "bound-report",
            CommandKind::MaintermCheck => "mainterm-check",
        };
        f.write_str(name)
    }
}

/// Fully resolved run description; serialized verbatim into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub kind: Option<KindSpec>,
    pub a: Option<i64>,
    pub d: Option<u64>,
    pub residue: Option<u64>,
    pub x: Option<u64>,
    pub z: Option<u64>,
    pub m: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub workers: usize,
    pub prime_cutoff: u64,
    pub series_order: usize,
    pub digits: u32,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub x_cap: u64,
}

/// Manifest written beside every `--out` report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub config: RunConfig,
    pub wall_time_ms: u64,
    pub cache: Option<crate::cache::CacheNote>,
}

/// Resolve one parsed command line into a [`RunConfig`].
pub fn resolve(command: CommandKind, args: &CommonArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };

    let a = pick(args.a, &file, "a")?;
    let x = pick(args.x, &file, "x")?;
    let z = pick(args.z, &file, "z")?;
    let m = pick(args.m, &file, "m")?;
    let d = pick(args.d, &file, "d")?;
    let residue = pick(args.residue, &file, "residue")?;
    let kind = pick(args.kind, &file, "kind")?;
    let workers = pick(args.workers, &file, "workers")?.unwrap_or(DEFAULT_WORKERS);
    let prime_cutoff =
        pick(args.prime_cutoff, &file, "prime-cutoff")?.unwrap_or(DEFAULT_PRIME_CUTOFF);
    let series_order =
        pick(args.series_order, &file, "series-order")?.unwrap_or(DEFAULT_SERIES_ORDER);
    let digits = pick(args.digits, &file, "digits")?.unwrap_or(DEFAULT_DIGITS);
    let format = pick(args.format, &file, "format")?.unwrap_or(Format::Csv);
    let checkpoints = match (
        &args.checkpoints,
        file.get("checkpoints").map(String::as_str),
    ) {
        (Some(s), _) => Some(parse_checkpoints(s)?),
        (None, Some(s)) => Some(parse_checkpoints(s)?),
        (None, None) => None,
    };
    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from));
    let cache_dir = args
        .cache_dir
        .clone()
        .or_else(|| file.get("cache-dir").map(PathBuf::from))
        .or_else(|| std::env::var_os(ENV_CACHE_DIR).map(PathBuf::from));
    let x_cap = match std::env::var(ENV_X_CAP) {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::usage(format!("{ENV_X_CAP} must be an integer, got {v:?}")))?,
        Err(_) => sums::DEFAULT_X_CAP,
    };

    Ok(RunConfig {
        command,
        kind,
        a,
        d,
        residue,
        x,
        z,
        m,
        checkpoints,
        workers,
        prime_cutoff,
        series_order,
        digits,
        format,
        out,
        cache_dir,
        x_cap,
    })
}

const KNOWN_KEYS: &[&str] = &[
    "a",
    "x",
    "z",
    "m",
    "kind",
    "d",
    "residue",
    "workers",
    "prime-cutoff",
    "series-order",
    "digits",
    "checkpoints",
    "out",
    "cache-dir",
    "format",
];

/// Parse a `key=value` config file: one pair per line, `#` comments,
/// blank lines ignored, keys named after the long flags.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config file {path:?}: {e}")))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "config {path:?} line {}: expected key=value, got {line:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::usage(format!(
                "config {path:?} line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag value, else config-file value parsed from its string form.
fn pick<T>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| CliError::usage(format!("config key {key} = {raw:?}: {e}"))),
        None => Ok(None),
    }
}

pub fn parse_checkpoints(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| CliError::usage(format!("bad checkpoint {part:?}")))
        })
        .collect()
}

/// The manifest sits beside its report: `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}
