//! Verification reports: named checks with expected and computed values,
//! tolerances and pass flags, serialized with a stable field order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the JSON layout emitted for reports and command output.
pub const SCHEMA_VERSION: u32 = 1;

fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One comparison of a computed quantity against its expected value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Stable identifier, unique within a report.
    pub id: String,
    /// Human-readable description.
    pub description: String,
    /// Reference value.
    pub expected: f64,
    /// Value produced by the library; NaN (`null` in JSON) when it failed.
    #[serde(deserialize_with = "nullable_f64")]
    pub computed: f64,
    /// Absolute tolerance; zero demands exact equality.
    pub tol: f64,
    /// Whether `|expected - computed| <= tol`.
    pub pass: bool,
}

impl Check {
    /// Builds a check and evaluates its pass flag. Non-finite values fail.
    pub fn new(id: impl Into<String>, description: impl Into<String>, expected: f64, computed: f64, tol: f64) -> Self {
        let pass = expected.is_finite() && computed.is_finite() && (expected - computed).abs() <= tol;
        Check { id: id.into(), description: description.into(), expected, computed, tol, pass }
    }

    /// An exact comparison of two integers.
    pub fn exact(id: impl Into<String>, description: impl Into<String>, expected: i64, computed: i64) -> Self {
        let mut c = Check::new(id, description, expected as f64, computed as f64, 0.0);
        c.pass = expected == computed;
        c
    }

    /// A failed check recording an error raised while computing the value.
    pub fn failed(id: impl Into<String>, description: impl Into<String>, expected: f64, tol: f64, err: &Error) -> Self {
        Check {
            id: id.into(),
            description: format!("{}: {err}", description.into()),
            expected,
            computed: f64::NAN,
            tol,
            pass: false,
        }
    }
}

/// A named value recorded alongside the checks without a pass criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Stable identifier.
    pub id: String,
    /// Recorded value.
    #[serde(deserialize_with = "nullable_f64")]
    pub value: f64,
}

/// Outcome of a verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Layout version, always [`SCHEMA_VERSION`] when emitted by this crate.
    pub version: u32,
    /// Suite name.
    pub suite: String,
    /// Checks in a deterministic order.
    pub checks: Vec<Check>,
    /// Values reported for information.
    #[serde(default)]
    pub observations: Vec<Observation>,
    /// Wall-clock time in seconds.
    pub wall_time_s: f64,
}

impl VerificationReport {
    /// An empty report for `suite`.
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport { version: SCHEMA_VERSION, suite: suite.into(), checks: Vec::new(), observations: Vec::new(), wall_time_s: 0.0 }
    }

    /// Appends a check.
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Appends an observation.
    pub fn observe(&mut self, id: impl Into<String>, value: f64) {
        self.observations.push(Observation { id: id.into(), value });
    }

    /// Appends the checks and observations of another report, prefixing ids
    /// with its suite name.
    pub fn absorb(&mut self, other: VerificationReport) {
        let prefix = other.suite;
        self.checks.extend(other.checks.into_iter().map(|mut c| {
            c.id = format!("{prefix}/{}", c.id);
            c
        }));
        self.observations.extend(other.observations.into_iter().map(|mut o| {
            o.id = format!("{prefix}/{}", o.id);
            o
        }));
        self.wall_time_s += other.wall_time_s;
    }

    /// Whether every check passed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Checks that failed.
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(format!("report serialization failed: {e}")))
    }

    /// Parses a report emitted by [`VerificationReport::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed report: {e}")))
    }
}
