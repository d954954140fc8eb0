//! The `inverse-spectrum` command line: configuration, subcommands and
//! dataset export.

pub mod commands;
pub mod config;
pub mod export;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use commands::run;
pub use config::{Cli, Command, RunConfig, SpectrumSource};
pub use export::{export_plot_data, Dataset, FigureData, PlotStyle};

/// Why a run stopped, and its exit code.
#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    /// Exit 1: bad arguments, spectra or files.
    Input(String),
    /// Exit 2: the computation itself failed.
    Numerical(String),
    /// Exit 3: the computation ran but checks failed.
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<reflectionless::Error> for Failure {
    fn from(e: reflectionless::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    match cli.resolve().and_then(|cfg| run(&cfg)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("inverse-spectrum: {f}");
            f.exit_code()
        }
    }
}
