//! Check results, suite reports and the byte-stable JSON writer.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// No pass/fail verdict: the inequality carries an unspecified constant.
    Report,
}

/// One inequality instance `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub params: BTreeMap<String, Value>,
}

/// Pass/fail tolerance `1e-9 · max(1, |lhs|, |rhs|)`.
pub fn tolerance(lhs: f64, rhs: f64) -> f64 {
    1e-9 * 1f64.max(lhs.abs()).max(rhs.abs())
}

impl CheckResult {
    /// Verdict for a proved inequality.
    pub fn verdict(check: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        let status = if slack >= -tolerance(lhs, rhs) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self::with_status(check, lhs, rhs, status)
    }

    /// Report-only row.
    pub fn report(check: &str, lhs: f64, rhs: f64) -> Self {
        Self::with_status(check, lhs, rhs, Status::Report)
    }

    fn with_status(check: &str, lhs: f64, rhs: f64, status: Status) -> Self {
        Self {
            check: check.to_string(),
            status,
            lhs,
            rhs,
            slack: rhs - lhs,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(Value::as_f64)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub report: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub results: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(results: Vec<CheckResult>, seed: u64) -> Self {
        let mut summary = Summary {
            seed,
            ..Summary::default()
        };
        for r in &results {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Report => summary.report += 1,
            }
        }
        Self { results, summary }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }

    /// Rows whose check name starts with `prefix`.
    pub fn rows<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckResult> + 'a {
        self.results.iter().filter(move |r| r.check.starts_with(prefix))
    }
}

/// Writes every float as `{:.16e}` (17 significant digits); non-finite
/// floats become `null`.
struct FixedFloatFormatter;

impl serde_json::ser::Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with sorted object keys and fixed float formatting, so equal
/// values always produce identical bytes. Ends with a newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    // going through Value sorts map keys
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter);
    tree.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}
