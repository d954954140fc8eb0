use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Error;
use crate::numerics::Precision;

/// One measured invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Non-negative deviation; `null` in JSON when the check could not run.
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub precision_used: Precision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    /// Passes when `measured ≤ tolerance`.
    pub fn new(name: impl Into<String>, measured: f64, tolerance: f64, precision: Precision) -> Self {
        CheckRecord {
            name: name.into(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
            precision_used: precision,
            detail: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, err: &Error) -> Self {
        CheckRecord {
            name: name.into(),
            measured: f64::NAN,
            tolerance: 0.0,
            passed: false,
            precision_used: Precision::Native,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        VerificationReport {
            subject: subject.into(),
            passed: true,
            checks: Vec::new(),
        }
    }

    /// A report holding only the error that stopped the pipeline.
    pub fn from_error(subject: impl Into<String>, stage: &str, err: &Error) -> Self {
        let mut r = Self::new(subject);
        r.push(CheckRecord::failed(stage, err));
        r
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.passed &= record.passed;
        self.checks.push(record);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "verification: {}", self.subject);
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>10}  {:<13}  result",
            "check", "measured", "tolerance", "precision"
        );
        for c in &self.checks {
            let _ = write!(
                out,
                "{:<width$}  {:>12.3e}  {:>10.1e}  {:<13}  {}",
                c.name,
                c.measured,
                c.tolerance,
                c.precision_used.to_string(),
                if c.passed { "pass" } else { "FAIL" }
            );
            if let Some(d) = &c.detail {
                let _ = write!(out, "  ({d})");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_verdict_follows_records() {
        let mut r = VerificationReport::new("x");
        r.push(CheckRecord::new("a", 1e-12, 1e-10, Precision::Native));
        assert!(r.passed);
        r.push(CheckRecord::new("b", 2.0, 1.0, Precision::Extended { bits: 256 }));
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        assert!(!CheckRecord::new("nan", f64::NAN, 1.0, Precision::Native).passed);
    }

    #[test]
    fn json_is_stable_and_nan_becomes_null() {
        let mut r = VerificationReport::new("demo");
        r.push(CheckRecord::new("a", 0.5, 1.0, Precision::Native));
        r.push(CheckRecord::failed("b", &Error::EmptySpectrum));
        let j = r.to_json();
        assert_eq!(j, r.clone().to_json());
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["passed"], false);
        assert!(v["checks"][1]["measured"].is_null());
        assert_eq!(v["checks"][0]["precision_used"], "native");
        assert!(r.render_table().contains("FAIL"));
    }
}
