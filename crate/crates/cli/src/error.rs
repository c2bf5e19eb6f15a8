use std::fmt;
use std::path::{Path, PathBuf};

use hodgetrack::basis::BasisError;
use hodgetrack::classify::ClassifyError;
use hodgetrack::hodge::HodgeError;
use hodgetrack::netgen::NetgenError;
use hodgetrack::oracle::OracleError;
use hodgetrack::pipeline::PipelineError;
use hodgetrack::simharness::SimError;
use hodgetrack::surface::SurfaceError;
use serde::Serialize;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

/// Failure reported as one JSON line on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: u8,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<&'static str>,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(code: u8, error: &'static str, message: impl Into<String>) -> Self {
        CliError { code, error, message: message.into(), path: None, stage: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, "usage", message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(EXIT_DATA, "data", message)
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        Self::new(EXIT_NOT_CONVERGED, "not_converged", message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { path: Some(path.to_path_buf()), ..Self::new(EXIT_DATA, "io", e.to_string()) }
    }

    pub fn at(mut self, path: &Path) -> Self {
        self.path = Some(path.to_path_buf());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.error, self.message)
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        let kind = if matches!(e, SurfaceError::Parse { .. }) { "parse" } else { "data" };
        Self::new(EXIT_DATA, kind, e.to_string())
    }
}

impl From<HodgeError> for CliError {
    fn from(e: HodgeError) -> Self {
        match e {
            HodgeError::InvalidConfig(m) => Self::usage(m),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<BasisError> for CliError {
    fn from(e: BasisError) -> Self {
        match e {
            BasisError::NotConverged { .. } => Self::not_converged(e.to_string()),
            BasisError::Hodge(h) => h.into(),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::InvalidMu(_) => Self::usage(e.to_string()),
            ClassifyError::Basis(b) => b.into(),
            ClassifyError::Parse { .. } => Self::new(EXIT_DATA, "parse", e.to_string()),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<NetgenError> for CliError {
    fn from(e: NetgenError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Basis(b) => b.into(),
            SimError::Hodge(h) => h.into(),
            SimError::Classify(c) => c.into(),
            e => Self::data(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let stage = e.stage;
        CliError { stage: Some(stage), ..CliError::from(e.source) }
    }
}
