use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuzzyError {
    #[error("fuzzy configuration error: {0}")]
    Config(String),
    #[error("malformed rule-base file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot read rule base {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One failed check in a scenario file. `field` is a dotted key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", format_parse(.path, .message))]
    Parse {
        path: Option<PathBuf>,
        message: String,
    },
    #[error("{} validation error(s):\n{}", .0.len(), format_issues(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error(transparent)]
    RuleBase(#[from] FuzzyError),
}

impl ScenarioError {
    pub fn issues(&self) -> &[ValidationIssue] {
        match self {
            ScenarioError::Invalid(v) => v,
            _ => &[],
        }
    }
}

fn format_parse(path: &Option<PathBuf>, message: &str) -> String {
    match path {
        Some(p) => format!("{}: {message}", p.display()),
        None => message.to_string(),
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The plant produced a non-finite state or left its valid envelope.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("simulation fault at t = {time:.3} s: {message}")]
pub struct SimFault {
    pub time: f64,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("plot {path}: {message}")]
    Plot { path: PathBuf, message: String },
}
