//! The `pkpz` command line: argument and config handling, dispatch, and
//! CSV/JSON output.
//!
//! Exit codes: 0 on success, 1 on a usage or config error, 2 when a result
//! misses its numerical-quality threshold or a verification check fails.

pub mod args;
mod commands;
pub mod record;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::Parser;
use pkpz::fredholm::TruncationSpec;

use args::{Cli, ConfigFile, Format, GlobalArgs, Layer};
use commands::Output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<pkpz::Error> for CliError {
    fn from(e: pkpz::Error) -> Self {
        use pkpz::Error::*;
        match e {
            Domain(_) | SizeMismatch(_) | ContourOrder(_) | InvalidArgument(_) | Unsupported(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub const SEED_VAR: &str = "PKPZ_SEED";
pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// Global settings after layering flags, config and environment.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub threshold: f64,
    pub trunc: TruncationSpec,
    /// leaf tolerance when set explicitly
    pub tol: Option<f64>,
    pub timing: bool,
}

impl Settings {
    fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let seed = match g.seed {
            Some(s) => s,
            None => match std::env::var(SEED_VAR) {
                Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_VAR}={v:?} is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        let threshold = g.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0) {
            return Err(CliError::Usage(format!("threshold must be positive, got {threshold}")));
        }
        let mut trunc = TruncationSpec::default();
        if let Some(k) = g.roots {
            if k == 0 {
                return Err(CliError::Usage("roots must be at least 1".into()));
            }
            trunc.roots = k;
        }
        if let Some(t) = g.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Usage(format!("tol must lie in (0, 1), got {t}")));
            }
            trunc.tol = t;
        }
        Ok(Self { seed, threshold, trunc, tol: g.tol, timing: g.timing })
    }
}

fn load_config(g: &GlobalArgs) -> Result<ConfigFile, CliError> {
    let Some(path) = &g.config else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let config = load_config(&cli.global)?;
    let global = cli.global.over(config.global.clone());
    let settings = Settings::resolve(&global)?;
    if let Some(j) = global.jobs {
        if j == 0 {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        // a pool set up earlier in this process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let output = commands::dispatch(cli.command, config, &settings)?;
    let mut sink: Box<dyn Write> = match &global.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let code = match output {
        Output::Records(records) => {
            record::write_rows(&mut sink, &records, global.format.unwrap_or(Format::Csv))?;
            let worst = records.iter().filter_map(|r| r.proxy()).fold(0.0, f64::max);
            if worst > settings.threshold {
                eprintln!("error proxy {worst:e} exceeds threshold {:e}", settings.threshold);
                2
            } else {
                0
            }
        }
        Output::Plot(rows) => {
            record::write_rows(&mut sink, &rows, global.format.unwrap_or(Format::Csv))?;
            0
        }
        Output::Verify(reports) => {
            match global.format {
                None => {
                    for r in &reports {
                        write!(sink, "{r}")?;
                    }
                }
                Some(Format::Json) => {
                    serde_json::to_writer_pretty(&mut sink, &reports)?;
                    writeln!(sink)?;
                }
                Some(Format::Csv) => record::write_rows(&mut sink, &commands::check_rows(&reports), Format::Csv)?,
            }
            if reports.iter().all(|r| r.passed()) {
                0
            } else {
                2
            }
        }
    };
    sink.flush()?;
    Ok(code)
}
