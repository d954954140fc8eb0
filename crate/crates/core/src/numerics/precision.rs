use serde::Serialize;

use super::real::{Bits, Precision};
use crate::error::{Error, Result};

/// Default working precision once escalation kicks in.
pub const DEFAULT_EXTENDED_BITS: u32 = 256;
/// Escalation never goes beyond this.
pub const MAX_EXTENDED_BITS: u32 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    Native,
    Extended { bits: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Escalation {
    Off,
    Auto,
}

/// How a computation chooses its arithmetic.
///
/// With [`Escalation::Auto`] a result is recomputed in extended precision
/// when its condition estimate, scaled by the unit roundoff in use, exceeds
/// `condition_threshold · 2⁻⁵³`. In native mode that is simply
/// `condition > condition_threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionPolicy {
    pub mode: PrecisionMode,
    pub escalation: Escalation,
    pub condition_threshold: f64,
    /// Precision of the first escalated attempt.
    pub escalation_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            mode: PrecisionMode::Native,
            escalation: Escalation::Off,
            condition_threshold: 1e12,
            escalation_bits: DEFAULT_EXTENDED_BITS,
            max_bits: MAX_EXTENDED_BITS,
        }
    }
}

/// A value together with the precision and conditioning it was obtained at.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub precision: Precision,
    pub condition: f64,
}

impl<T> Evaluated<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Evaluated<U> {
        Evaluated {
            value: f(self.value),
            precision: self.precision,
            condition: self.condition,
        }
    }
}

impl PrecisionPolicy {
    pub fn native() -> Self {
        Self::default()
    }

    pub fn extended(bits: u32) -> Self {
        PrecisionPolicy {
            mode: PrecisionMode::Extended { bits },
            ..Self::default()
        }
    }

    /// Native arithmetic with automatic escalation.
    pub fn auto() -> Self {
        Self::default().with_escalation(Escalation::Auto)
    }

    pub fn with_escalation(mut self, escalation: Escalation) -> Self {
        self.escalation = escalation;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.condition_threshold = threshold;
        self
    }

    pub fn with_escalation_bits(mut self, bits: u32) -> Self {
        self.escalation_bits = bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let PrecisionMode::Extended { bits } = self.mode {
            if bits < 64 {
                return Err(Error::InvalidPolicy(format!(
                    "extended precision needs at least 64 bits, got {bits}"
                )));
            }
        }
        if self.escalation_bits < 64 || self.escalation_bits > self.max_bits {
            return Err(Error::InvalidPolicy(format!(
                "escalation precision {} outside [64, {}]",
                self.escalation_bits, self.max_bits
            )));
        }
        if !(self.condition_threshold > 1.0) {
            return Err(Error::InvalidPolicy(format!(
                "condition threshold must exceed 1, got {}",
                self.condition_threshold
            )));
        }
        Ok(())
    }

    fn trusted(&self, condition: f64, bits: u32) -> bool {
        let slack = (bits as f64 - f64::MANTISSA_DIGITS as f64).exp2();
        condition <= self.condition_threshold * slack
    }

    /// Runs a computation under this policy. Both closures return the value
    /// and the condition estimate of the system they solved.
    pub fn evaluate<R>(
        &self,
        native: impl Fn() -> Result<(R, f64)>,
        extended: impl Fn(Bits) -> Result<(R, f64)>,
    ) -> Result<Evaluated<R>> {
        let auto = self.escalation == Escalation::Auto;
        let (first, bits) = match self.mode {
            PrecisionMode::Native => (
                native().map(|(v, c)| Evaluated {
                    value: v,
                    precision: Precision::Native,
                    condition: c,
                }),
                f64::MANTISSA_DIGITS,
            ),
            PrecisionMode::Extended { bits } => (run_extended(&extended, bits), bits),
        };
        match first {
            Ok(ev) if !auto || self.trusted(ev.condition, bits) => Ok(ev),
            Ok(ev) => self.escalate(&extended, self.next_bits(bits), Some(ev)),
            Err(e) if auto && e.is_numerical() => self.escalate(&extended, self.next_bits(bits), None)
                .map_err(|_| e),
            Err(e) => Err(e),
        }
    }

    fn next_bits(&self, current: u32) -> u32 {
        if current < self.escalation_bits {
            self.escalation_bits
        } else {
            current.saturating_mul(2)
        }
    }

    fn escalate<R>(
        &self,
        extended: &impl Fn(Bits) -> Result<(R, f64)>,
        mut bits: u32,
        mut fallback: Option<Evaluated<R>>,
    ) -> Result<Evaluated<R>> {
        let mut last_err = None;
        while bits <= self.max_bits {
            match run_extended(extended, bits) {
                Ok(ev) if self.trusted(ev.condition, bits) => return Ok(ev),
                Ok(ev) => fallback = Some(ev),
                Err(e) if e.is_numerical() => last_err = Some(e),
                Err(e) => return Err(e),
            }
            log::debug!("escalating precision beyond {bits} bits");
            bits = bits.saturating_mul(2);
        }
        match (fallback, last_err) {
            (Some(ev), _) => Ok(ev),
            (None, Some(e)) => Err(e),
            (None, None) => Err(Error::InvalidPolicy("no extended precision attempt was possible".into())),
        }
    }
}

fn run_extended<R>(extended: &impl Fn(Bits) -> Result<(R, f64)>, bits: u32) -> Result<Evaluated<R>> {
    extended(Bits(bits as usize)).map(|(v, c)| Evaluated {
        value: v,
        precision: Precision::Extended { bits },
        condition: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PrecisionPolicy::default().validate().is_ok());
        assert!(PrecisionPolicy::extended(32).validate().is_err());
        assert!(PrecisionPolicy::default().with_threshold(1.0).validate().is_err());
        assert!(PrecisionPolicy::default().with_escalation_bits(2048).validate().is_err());
    }

    #[test]
    fn native_result_kept_when_well_conditioned() {
        let ev = PrecisionPolicy::auto()
            .evaluate(|| Ok((1.0, 10.0)), |_| Ok((2.0, 10.0)))
            .unwrap();
        assert_eq!(ev.value, 1.0);
        assert_eq!(ev.precision, Precision::Native);
    }

    #[test]
    fn escalates_on_bad_conditioning_and_errors() {
        let p = PrecisionPolicy::auto();
        let ev = p.evaluate(|| Ok((1.0, 1e13)), |b| Ok((b.0 as f64, 1e13))).unwrap();
        assert_eq!(ev.precision, Precision::Extended { bits: 256 });
        assert_eq!(ev.value, 256.0);

        let ev = p
            .evaluate(
                || Err::<(f64, f64), _>(Error::SingularMatrix { pivot: 0.0 }),
                |b| {
                    if b.0 < 512 {
                        Err(Error::SingularMatrix { pivot: 0.0 })
                    } else {
                        Ok((b.0 as f64, 1.0))
                    }
                },
            )
            .unwrap();
        assert_eq!(ev.precision, Precision::Extended { bits: 512 });
    }

    #[test]
    fn escalation_off_keeps_native_answer() {
        let ev = PrecisionPolicy::native()
            .evaluate(|| Ok((1.0, 1e20)), |_| Ok((2.0, 1.0)))
            .unwrap();
        assert_eq!(ev.precision, Precision::Native);
        let err = PrecisionPolicy::native()
            .evaluate(|| Err::<(f64, f64), _>(Error::Overflow { exponent: 800.0 }), |_| Ok((2.0, 1.0)))
            .unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn never_exceeds_max_bits() {
        let p = PrecisionPolicy::auto();
        let err = p
            .evaluate(
                || Err::<(f64, f64), _>(Error::SingularMatrix { pivot: 0.0 }),
                |b| {
                    assert!(b.0 <= 1024);
                    Err(Error::SingularMatrix { pivot: 0.0 })
                },
            )
            .unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
    }
}
