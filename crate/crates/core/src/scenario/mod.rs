//! Scenario documents in, reports out.
//!
//! A scenario is a JSON document naming one operation (`kind`) and its
//! payload. Reports echo the scenario with every default filled in, so a
//! report is enough to reproduce itself.

mod doc;
mod ops;
pub mod plot;
pub mod suite;

use serde::Serialize;
use serde_json::Value;

pub use doc::{Bounds, Kind, Scenario, SuiteCheck, SuiteDoc, SystemDoc, TableEntry};

use crate::curve::Verdict;
use crate::error::Error;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PARSE: i32 = 64;
pub const EXIT_SCHEMA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_OPERATION: i32 = 70;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("cannot read scenario: {0}")]
    Io(String),
    #[error("operation failed: {0}")]
    Operation(#[from] Error),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse { .. } => EXIT_PARSE,
            ScenarioError::Schema(_) => EXIT_SCHEMA,
            ScenarioError::Io(_) => EXIT_NO_INPUT,
            ScenarioError::Operation(_) => EXIT_OPERATION,
        }
    }

    fn from_json(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof => ScenarioError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
            Category::Data => ScenarioError::Schema(e.to_string()),
            Category::Io => ScenarioError::Io(e.to_string()),
        }
    }
}

/// Command-line overrides applied before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub degree_bound: Option<u64>,
    pub precision: Option<u32>,
    /// Worker threads for suites; does not change the report.
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: Kind,
    pub seed: u64,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub scenario: Scenario,
    pub result: Value,
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// A report plus an optional static plot.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub svg: Option<String>,
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    parse_as(text, None)
}

/// Parses a scenario, filling in `kind` when the document leaves it out and
/// rejecting documents of a different kind.
pub fn parse_as(text: &str, kind: Option<Kind>) -> Result<Scenario, ScenarioError> {
    let mut value: Value = serde_json::from_str(text).map_err(ScenarioError::from_json)?;
    if let Some(k) = kind {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ScenarioError::Schema("a scenario is a JSON object".into()))?;
        match obj.get("kind") {
            None => {
                obj.insert("kind".into(), Value::from(k.name()));
            }
            Some(v) if v.as_str() == Some(k.name()) => {}
            Some(v) => {
                return Err(ScenarioError::Schema(format!(
                    "document has kind {v}, expected {:?}",
                    k.name()
                )))
            }
        }
    }
    serde_json::from_value(value).map_err(ScenarioError::from_json)
}

pub fn run_str(text: &str, overrides: &Overrides) -> Result<Outcome, ScenarioError> {
    run(parse(text)?, overrides)
}

pub fn read(path: &std::path::Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))
}

pub fn run_path(path: &std::path::Path, overrides: &Overrides) -> Result<Outcome, ScenarioError> {
    run_str(&read(path)?, overrides)
}

pub fn run(mut scenario: Scenario, overrides: &Overrides) -> Result<Outcome, ScenarioError> {
    scenario.apply(overrides);
    let prepared = scenario.prepare().map_err(ScenarioError::Schema)?;
    let (verdict, result, svg) = ops::dispatch(&scenario, &prepared, overrides.jobs)?;
    Ok(Outcome {
        report: Report {
            schema_version: SCHEMA_VERSION,
            kind: scenario.kind,
            seed: scenario.seed,
            verdict,
            exit_code: verdict.exit_code(),
            scenario,
            result,
        },
        svg,
    })
}
