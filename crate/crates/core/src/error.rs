use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::EngineError;
use crate::induction::InductionError;
use crate::parser::ParseError;
use crate::printer::PrintError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid dialect profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Print(#[from] PrintError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error("{0}")]
    Invalid(String),
    #[error("no .sql files under {0}")]
    NoInput(PathBuf),
    #[error("target does not parse: {0}")]
    TargetParse(ParseError),
    #[error("no residual errors with code {0}")]
    NoResidual(String),
    #[error("no segment {0}")]
    UnknownSegment(String),
    #[error("stale preview: made at version {preview}, session is at version {current}")]
    StalePreview { preview: u64, current: u64 },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
