//! Verification suites, training and request commands, and the JSON
//! report they share.

mod cross_entropy;
pub mod data;
mod section6;
mod suites;
mod train;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::learn::Comparison;

pub use data::{Dataset, ParamsFile};
pub use section6::{NetworkA, Point, DISPLAY_EPS};
pub use train::{cmd_request, cmd_train, RequestConfig, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITE_NAMES: [&str; 8] = [
    "learn-axioms",
    "para-axioms",
    "functoriality",
    "bimonoid",
    "neurons",
    "section6",
    "gradients",
    "cross-entropy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Absolute,
    Relative,
}

/// One numerical law, with the worst deviation seen over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `null` in JSON when some trial produced no comparable value.
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub measure: Measure,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            max_abs_deviation: deviation,
            tolerance,
            measure: Measure::Absolute,
            pass: deviation <= tolerance,
        }
    }

    pub fn relative(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Check {
            measure: Measure::Relative,
            ..Check::new(name, deviation, tolerance)
        }
    }

    pub fn from_comparison(name: impl Into<String>, c: &Comparison, tolerance: f64) -> Self {
        let deviation = if c.skipped > 0 { f64::INFINITY } else { c.deviation.max() };
        let mut check = Check::new(name, deviation, tolerance);
        check.pass &= c.passes();
        check
    }
}

/// A published formula that disagrees with what the functor computes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub name: String,
    pub max_abs_deviation: f64,
    pub note: String,
}

impl Discrepancy {
    pub fn new(name: impl Into<String>, deviation: f64, note: impl Into<String>) -> Self {
        Discrepancy {
            name: name.into(),
            max_abs_deviation: deviation,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub discrepancies: Vec<Discrepancy>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            seed,
            checks: Vec::new(),
            discrepancies: Vec::new(),
            details: Value::Null,
            timing_ms: None,
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn discrepancy(&mut self, d: Discrepancy) {
        self.discrepancies.push(d);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    /// Replaces the default tolerance of every check.
    pub tol: Option<f64>,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            trials: 100,
            tol: None,
            exec: Execution::default(),
        }
    }
}

impl VerifyOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub fn cmd_verify(suite: &str, opts: &VerifyOptions) -> Result<Report> {
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let Some(t) = opts.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be a non-negative number, got {t}")));
        }
    }
    let command = format!("verify {suite} --seed {} --trials {}", opts.seed, opts.trials)
        + &opts.tol.map_or(String::new(), |t| format!(" --tol {t}"));
    let mut report = Report::new(command, Some(opts.seed));
    match suite {
        "learn-axioms" => suites::learn_axioms(opts, &mut report)?,
        "para-axioms" => suites::para_axioms(opts, &mut report)?,
        "functoriality" => suites::functoriality(opts, &mut report)?,
        "bimonoid" => suites::bimonoid(opts, &mut report)?,
        "neurons" => suites::neurons(opts, &mut report)?,
        "section6" => section6::suite(opts, &mut report)?,
        "gradients" => suites::gradients(opts, &mut report)?,
        "cross-entropy" => cross_entropy::suite(opts, &mut report)?,
        _ => {
            return Err(Error::UnknownName {
                kind: "suite",
                name: suite.to_string(),
                valid: SUITE_NAMES.to_vec(),
            })
        }
    }
    Ok(report)
}
