//! Command-line grammar and its resolution into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use reflectionless::numerics::DEFAULT_EXTENDED_BITS;
use reflectionless::spectrum::SpectrumFile;
use reflectionless::{Escalation, Grid, PrecisionMode, PrecisionPolicy, PresetKind, Spectrum};

use crate::Failure;

/// Overrides the default width of extended arithmetic.
pub const BITS_ENV: &str = "INVERSE_SPECTRUM_PRECISION_BITS";

#[derive(Debug, Parser)]
#[command(
    name = "inverse-spectrum",
    version,
    about = "Reflectionless potentials, bound states and scattering states from a bound-state spectrum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Built-in spectrum: sho, isw, hydrogen, power, lost
    #[arg(long, global = true, conflicts_with = "spectrum")]
    pub preset: Option<String>,

    /// JSON file with {"energies": [...]} or {"kappas": [...]}
    #[arg(long, global = true)]
    pub spectrum: Option<PathBuf>,

    /// Sampling grid as x_min:x_max:points
    #[arg(long, global = true, default_value = "-8:8:1601", allow_hyphen_values = true)]
    pub grid: Grid,

    /// native, extended or extended:<bits>
    #[arg(long, global = true, default_value = "native")]
    pub precision: String,

    /// Retry ill-conditioned evaluations in extended arithmetic
    #[arg(long, global = true)]
    pub auto_escalate: bool,

    /// Scattering energies (repeat or separate with commas)
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub energy: Vec<f64>,

    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Write the verification report as JSON to this file
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Unnormalized Kay–Moses states instead of ψ_n/c_n
    #[arg(long, global = true)]
    pub raw: bool,

    /// Skip the SVG plots
    #[arg(long, global = true)]
    pub no_svg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// V(x) on the grid plus the energy levels
    Potential,
    /// Bound-state wave functions
    Bound,
    /// Scattering states at the given energies
    Scatter,
    /// Run every invariant check and report
    Verify,
    /// Datasets for all figures
    Figures,
    /// List the built-in spectra
    Presets,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSource {
    Preset(PresetKind),
    File(PathBuf),
}

impl SpectrumSource {
    pub fn spectrum(&self) -> Result<Spectrum, Failure> {
        Ok(match self {
            SpectrumSource::Preset(kind) => kind.spectrum()?,
            SpectrumSource::File(path) => Spectrum::load(path)?,
        })
    }

    /// The levels as given, ground state first: preset values or file
    /// energies verbatim, `−κ²` for a file of decay constants.
    pub fn stated_energies(&self) -> Result<Vec<f64>, Failure> {
        let mut e = match self {
            SpectrumSource::Preset(kind) => kind.energies()?,
            SpectrumSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                let file = SpectrumFile::parse(&text)?;
                match (file.energies, file.kappas) {
                    (Some(e), None) => e,
                    (None, Some(k)) => k.iter().map(|k| -k * k).collect(),
                    _ => return Err(Failure::Input("spectrum file needs exactly one of energies or kappas".into())),
                }
            }
        };
        e.sort_by(f64::total_cmp);
        Ok(e)
    }

    pub fn label(&self) -> String {
        match self {
            SpectrumSource::Preset(kind) => kind.tag().to_string(),
            SpectrumSource::File(path) => path.display().to_string(),
        }
    }
}

/// A parsed and validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<SpectrumSource>,
    pub grid: Grid,
    pub policy: PrecisionPolicy,
    pub energies: Vec<f64>,
    pub out_dir: PathBuf,
    pub report: Option<PathBuf>,
    pub raw: bool,
    pub svg: bool,
}

impl RunConfig {
    /// The spectrum source, required by every command that computes.
    pub fn source(&self) -> Result<&SpectrumSource, Failure> {
        self.source
            .as_ref()
            .ok_or_else(|| Failure::Input("one of --preset or --spectrum is required".into()))
    }
}

/// `native`, `extended` or `extended:<bits>`.
pub fn parse_precision(text: &str, default_bits: u32) -> Result<PrecisionMode, Failure> {
    let bad = || Failure::Input(format!("invalid precision {text:?}: expected native, extended or extended:<bits>"));
    match text.split_once(':') {
        None if text == "native" => Ok(PrecisionMode::Native),
        None if text == "extended" => Ok(PrecisionMode::Extended { bits: default_bits }),
        Some(("extended", bits)) => Ok(PrecisionMode::Extended {
            bits: bits.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn env_bits(value: Option<String>) -> Result<u32, Failure> {
    match value {
        None => Ok(DEFAULT_EXTENDED_BITS),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{BITS_ENV}={v:?} is not a bit count"))),
    }
}

impl Cli {
    pub fn resolve(self) -> Result<RunConfig, Failure> {
        self.resolve_with_env(std::env::var(BITS_ENV).ok())
    }

    /// [`Cli::resolve`] with the value of [`BITS_ENV`] given explicitly.
    pub fn resolve_with_env(self, bits_env: Option<String>) -> Result<RunConfig, Failure> {
        let bits = env_bits(bits_env)?;
        let mode = parse_precision(&self.precision, bits)?;
        let mut policy = PrecisionPolicy {
            mode,
            escalation_bits: bits,
            ..PrecisionPolicy::default()
        };
        if self.auto_escalate {
            policy.escalation = Escalation::Auto;
        }
        policy.validate()?;
        let source = match (self.preset, self.spectrum) {
            (Some(tag), None) => Some(SpectrumSource::Preset(tag.parse()?)),
            (None, Some(path)) => Some(SpectrumSource::File(path)),
            (None, None) => None,
            (Some(_), Some(_)) => return Err(Failure::Input("--preset and --spectrum are exclusive".into())),
        };
        if let Some(e) = self.energy.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Failure::Input(format!("scattering energy {e} is not positive")));
        }
        Ok(RunConfig {
            command: self.command,
            source,
            grid: self.grid,
            policy,
            energies: self.energy,
            out_dir: self.out,
            report: self.report,
            raw: self.raw,
            svg: !self.no_svg,
        })
    }
}
