//! Command-line front end: every subcommand writes a CSV (or JSON) table
//! and, with `--out`, a manifest that reproduces the run.

mod cli;
mod commands;
pub mod config;
pub mod output;

use clap::Parser;
use std::ffi::OsString;

/// Environment variable naming the count-table cache directory.
pub const CACHE_ENV: &str = "BOUNDED_CYCLES_CACHE";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(bounded_cycles::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(bounded_cycles::Error::Io(_)) => 3,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<bounded_cycles::Error> for CliError {
    fn from(e: bounded_cycles::Error) -> Self {
        CliError::Core(e)
    }
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match try_run(argv.into_iter().map(Into::into).collect()) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            e.exit_code()
        }
    }
}

fn try_run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = config::expand_config(argv)?;
    let cli = match cli::Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    Ok(())
                }
                _ => {
                    let _ = e.print();
                    Err(CliError::Usage(String::new()))
                }
            };
        }
    };
    let args = commands::reproducible_args(&argv);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| commands::execute(cli.command, args))
}

pub(crate) fn try_run_expanded(argv: Vec<OsString>) -> Result<(), CliError> {
    try_run(argv)
}
