//! Bound-state spectra: validation, presets and unit calibration.
//!
//! Energies are in units where ħ²/2m = 1, so a level `E_n` corresponds to
//! the decay constant `κ_n = √(−E_n)`. A [`Spectrum`] stores only the decay
//! constants, sorted so that `κ_1` (the ground state) is the largest.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of bound states.
pub const DEFAULT_MAX_STATES: usize = 8;
/// Default relative separation tolerance `|κ_i − κ_j| / κ_i`.
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-9;

/// Validation knobs for [`Spectrum`] construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub separation_tol: f64,
    pub max_states: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            separation_tol: DEFAULT_SEPARATION_TOL,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl SpectrumOptions {
    /// Raises the state cap. Beyond the default the wave functions become
    /// hard to resolve even with extended precision, so this warns.
    pub fn with_max_states(mut self, max_states: usize) -> Self {
        if max_states > DEFAULT_MAX_STATES {
            log::warn!(
                "state cap raised to {max_states} (default {DEFAULT_MAX_STATES}); expect precision escalation"
            );
        }
        self.max_states = max_states;
        self
    }
}

/// Strictly descending, well-separated positive decay constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    kappas: Vec<f64>,
}

impl Spectrum {
    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        Self::from_energies_with(energies, SpectrumOptions::default())
    }

    pub fn from_energies_with(energies: &[f64], opts: SpectrumOptions) -> Result<Self> {
        if let Some(&energy) = energies.iter().find(|e| !(**e < 0.0)) {
            return Err(Error::NonNegativeEnergy { energy });
        }
        let kappas: Vec<f64> = energies.iter().map(|e| (-e).sqrt()).collect();
        Self::from_kappas_with(&kappas, opts)
    }

    pub fn from_kappas(kappas: &[f64]) -> Result<Self> {
        Self::from_kappas_with(kappas, SpectrumOptions::default())
    }

    pub fn from_kappas_with(kappas: &[f64], opts: SpectrumOptions) -> Result<Self> {
        if kappas.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if let Some(&kappa) = kappas.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::NonPositiveKappa { kappa });
        }
        if kappas.len() > opts.max_states {
            return Err(Error::TooManyStates {
                count: kappas.len(),
                max: opts.max_states,
            });
        }
        let mut sorted = kappas.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for w in sorted.windows(2) {
            if (w[0] - w[1]) / w[0] <= opts.separation_tol {
                return Err(Error::DegenerateSpectrum {
                    first: w[0],
                    second: w[1],
                });
            }
        }
        Ok(Spectrum { kappas: sorted })
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// `E_n = −κ_n²`, ground state first.
    pub fn energies(&self) -> Vec<f64> {
        self.kappas.iter().map(|k| -k * k).collect()
    }

    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }

    pub fn ground_kappa(&self) -> f64 {
        self.kappas[0]
    }

    /// Smallest decay constant, which sets the width of the tails.
    pub fn min_kappa(&self) -> f64 {
        *self.kappas.last().expect("non-empty spectrum")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::SpectrumFile(format!("{}: {e}", path.display())))?;
        SpectrumFile::parse(&text)?.into_spectrum()
    }
}

/// On-disk spectrum: exactly one of `energies` or `kappas`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
}

impl SpectrumFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpectrumFile(e.to_string()))
    }

    pub fn into_spectrum(self) -> Result<Spectrum> {
        match (self.energies, self.kappas) {
            (Some(e), None) => Spectrum::from_energies(&e),
            (None, Some(k)) => Spectrum::from_kappas(&k),
            _ => Err(Error::SpectrumFile(
                "expected exactly one of \"energies\" or \"kappas\"".into(),
            )),
        }
    }
}

/// The built-in spectra.
#[derive(Clone, Debug, PartialEq)]
pub enum PresetKind {
    /// `E_n = offset + 2n − 1`: oscillator with k = 2, m = 1/2.
    Sho { levels: usize, offset: f64 },
    /// `E_n = base + n²`: square well of width π on a floor at `base`.
    Isw { levels: usize, base: f64 },
    /// `E_n = ground / n²` (Rydberg series).
    Hydrogen { levels: usize, ground: f64 },
    /// `E_n = offset + scale·n^exponent`.
    Power {
        levels: usize,
        exponent: f64,
        scale: f64,
        offset: f64,
    },
    /// −4, −8, −15, −16, −23, −42.
    Lost,
    Custom { energies: Vec<f64> },
}

pub const LOST_ENERGIES: [f64; 6] = [-42.0, -23.0, -16.0, -15.0, -8.0, -4.0];

impl PresetKind {
    /// Tags accepted on the command line, in listing order.
    pub const TAGS: [&'static str; 5] = ["sho", "isw", "hydrogen", "power", "lost"];

    pub fn sho() -> Self {
        PresetKind::Sho {
            levels: 4,
            offset: -10.0,
        }
    }

    pub fn isw() -> Self {
        PresetKind::Isw {
            levels: 4,
            base: -26.0,
        }
    }

    pub fn hydrogen() -> Self {
        PresetKind::Hydrogen {
            levels: 4,
            ground: -13.6,
        }
    }

    pub fn power() -> Self {
        PresetKind::Power {
            levels: 5,
            exponent: 4.0,
            scale: 0.1,
            offset: -63.5,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            PresetKind::Sho { .. } => "sho",
            PresetKind::Isw { .. } => "isw",
            PresetKind::Hydrogen { .. } => "hydrogen",
            PresetKind::Power { .. } => "power",
            PresetKind::Lost => "lost",
            PresetKind::Custom { .. } => "custom",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PresetKind::Sho { levels, offset } => {
                format!("{levels} oscillator levels E_n = {offset} + 2n - 1")
            }
            PresetKind::Isw { levels, base } => format!("{levels} square-well levels E_n = {base} + n^2"),
            PresetKind::Hydrogen { levels, ground } => {
                format!("{levels} Rydberg levels E_n = {ground}/n^2")
            }
            PresetKind::Power {
                levels,
                exponent,
                scale,
                offset,
            } => format!("{levels} levels E_n = {offset} + {scale} n^{exponent}"),
            PresetKind::Lost => "the six numbers -4, -8, -15, -16, -23, -42".into(),
            PresetKind::Custom { energies } => format!("{} custom levels", energies.len()),
        }
    }

    /// Energies in ground-state-first order.
    pub fn energies(&self) -> Result<Vec<f64>> {
        let levels = |n: usize| -> Result<()> {
            if n == 0 || n > DEFAULT_MAX_STATES {
                Err(Error::InvalidParams(format!(
                    "level count {n} outside 1..={DEFAULT_MAX_STATES}"
                )))
            } else {
                Ok(())
            }
        };
        let energies: Vec<f64> = match self {
            PresetKind::Sho { levels: n, offset } => {
                levels(*n)?;
                (1..=*n).map(|k| offset + 2.0 * k as f64 - 1.0).collect()
            }
            PresetKind::Isw { levels: n, base } => {
                levels(*n)?;
                (1..=*n).map(|k| base + (k * k) as f64).collect()
            }
            PresetKind::Hydrogen { levels: n, ground } => {
                levels(*n)?;
                (1..=*n).map(|k| ground / (k * k) as f64).collect()
            }
            PresetKind::Power {
                levels: n,
                exponent,
                scale,
                offset,
            } => {
                levels(*n)?;
                if !(*scale > 0.0) || !(*exponent > 0.0) {
                    return Err(Error::InvalidParams(
                        "power preset needs positive scale and exponent".into(),
                    ));
                }
                (1..=*n).map(|k| offset + scale * (k as f64).powf(*exponent)).collect()
            }
            PresetKind::Lost => LOST_ENERGIES.to_vec(),
            PresetKind::Custom { energies } => energies.clone(),
        };
        if let Some(e) = energies.iter().find(|e| !(**e < 0.0)) {
            return Err(Error::InvalidParams(format!(
                "{} preset produces non-negative level {e}",
                self.tag()
            )));
        }
        Ok(energies)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::from_energies(&self.energies()?)
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sho" => Ok(PresetKind::sho()),
            "isw" => Ok(PresetKind::isw()),
            "hydrogen" | "h" => Ok(PresetKind::hydrogen()),
            "power" | "power4" | "p4" => Ok(PresetKind::power()),
            "lost" => Ok(PresetKind::Lost),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Convenience for [`PresetKind::spectrum`].
pub fn preset(kind: &PresetKind) -> Result<Spectrum> {
    kind.spectrum()
}

/// Size of one natural length unit in the unit of `known_product`.
///
/// Both arguments are the same physical constant (energy × length) in the
/// same energy unit: `known_product` in a known length unit (ħc = 197 MeV·fm),
/// `natural_product` per natural length unit (√(2mc²) in ħ²/2m = 1 units).
pub fn calibrate_length(known_product: f64, natural_product: f64) -> Result<f64> {
    for v in [known_product, natural_product] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveInput(v));
        }
    }
    Ok(known_product / natural_product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lost_energies_sort_by_kappa() {
        let s = Spectrum::from_energies(&[-4.0, -8.0, -15.0, -16.0, -23.0, -42.0]).unwrap();
        let expect = [42f64.sqrt(), 23f64.sqrt(), 4.0, 15f64.sqrt(), 8f64.sqrt(), 2.0];
        assert_eq!(s.kappas(), &expect);
    }

    #[test]
    fn single_state() {
        assert_eq!(Spectrum::from_energies(&[-1.0]).unwrap().kappas(), &[1.0]);
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            Spectrum::from_energies(&[-4.0, -4.0]),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            Spectrum::from_energies(&[-4.0, 0.0]),
            Err(Error::NonNegativeEnergy { .. })
        ));
        assert!(matches!(
            Spectrum::from_energies(&[-1.0, f64::NAN]),
            Err(Error::NonNegativeEnergy { .. })
        ));
        assert!(matches!(Spectrum::from_energies(&[]), Err(Error::EmptySpectrum)));
        let nine: Vec<f64> = (1..=9).map(|n| -(n as f64)).collect();
        assert!(matches!(
            Spectrum::from_energies(&nine),
            Err(Error::TooManyStates { count: 9, max: 8 })
        ));
        let opts = SpectrumOptions::default().with_max_states(9);
        assert_eq!(Spectrum::from_energies_with(&nine, opts).unwrap().len(), 9);
        // relative tolerance
        assert!(Spectrum::from_kappas(&[1.0, 1.0 + 5e-10]).is_err());
        assert!(Spectrum::from_kappas(&[1.0, 1.0 + 5e-9]).is_ok());
        assert!(Spectrum::from_kappas(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn preset_values() {
        assert_eq!(PresetKind::isw().energies().unwrap(), vec![-25.0, -22.0, -17.0, -10.0]);
        assert_eq!(PresetKind::sho().energies().unwrap(), vec![-9.0, -7.0, -5.0, -3.0]);
        let h = PresetKind::hydrogen().energies().unwrap();
        assert_eq!(h[0], -13.6);
        assert_eq!(h[1], -3.4);
        assert!((h[2] + 1.511_111_111_111_111).abs() < 1e-15);
        assert_eq!(h[3], -0.85);
        let lost = PresetKind::Lost.spectrum().unwrap().energies();
        for (got, want) in lost.iter().zip(LOST_ENERGIES) {
            assert!((got - want).abs() < 1e-13);
        }
        let p = PresetKind::power().energies().unwrap();
        assert_eq!(p.len(), 5);
        assert!((p[4] + 1.0).abs() < 1e-12);
        // spacing relative to the ground state scales like n^4 − 1
        for (n, e) in p.iter().enumerate().skip(1) {
            let m = (n + 1) as f64;
            assert!(((e - p[0]) / (p[1] - p[0]) - (m.powi(4) - 1.0) / 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn preset_parameter_errors() {
        let bad = PresetKind::Isw { levels: 6, base: -26.0 };
        assert!(matches!(bad.energies(), Err(Error::InvalidParams(_))));
        let bad = PresetKind::Sho { levels: 0, offset: -10.0 };
        assert!(bad.energies().is_err());
        assert!("quartic".parse::<PresetKind>().is_err());
        assert_eq!("lost".parse::<PresetKind>().unwrap(), PresetKind::Lost);
    }

    #[test]
    fn calibration_examples() {
        let q = calibrate_length(197.0, (2.0f64 * 140.0).sqrt()).unwrap();
        assert!((q - 11.8).abs() < 0.05, "{q}");
        let r = calibrate_length(1.44, (4.0f64 * 13.6).sqrt()).unwrap();
        assert!((r - 0.195).abs() < 0.0005, "{r}");
        assert_eq!(calibrate_length(3.0, 3.0).unwrap(), 1.0);
        assert!(matches!(calibrate_length(0.0, 1.0), Err(Error::NonPositiveInput(_))));
    }

    #[test]
    fn spectrum_file_requires_exactly_one_key() {
        let s = SpectrumFile::parse(r#"{"energies": [-1, -4]}"#).unwrap().into_spectrum().unwrap();
        assert_eq!(s.kappas(), &[2.0, 1.0]);
        let s = SpectrumFile::parse(r#"{"kappas": [1, 3]}"#).unwrap().into_spectrum().unwrap();
        assert_eq!(s.kappas(), &[3.0, 1.0]);
        assert!(SpectrumFile::parse(r#"{"energies": [-1], "kappas": [1]}"#)
            .unwrap()
            .into_spectrum()
            .is_err());
        assert!(SpectrumFile::parse(r#"{}"#).unwrap().into_spectrum().is_err());
        assert!(SpectrumFile::parse(r#"{"levels": [-1]}"#).is_err());
    }

    proptest! {
        #[test]
        fn energy_view_round_trips(mut es in proptest::collection::vec(-50.0f64..-0.1, 1..8)) {
            es.sort_by(|a, b| a.total_cmp(b));
            es.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let s = Spectrum::from_energies(&es).unwrap();
            let again = Spectrum::from_energies(&s.energies()).unwrap();
            prop_assert_eq!(&s, &again);
            for (a, b) in s.energies().iter().zip(&es) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs());
            }
        }

        #[test]
        fn order_of_input_is_irrelevant(es in proptest::collection::btree_set(1u32..400, 1..8), seed in any::<u64>()) {
            let base: Vec<f64> = es.iter().map(|&e| -(e as f64) / 7.0).collect();
            let mut shuffled = base.clone();
            let len = shuffled.len();
            let mut state = seed;
            for i in (1..len).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(Spectrum::from_energies(&base).unwrap(), Spectrum::from_energies(&shuffled).unwrap());
        }
    }
}
