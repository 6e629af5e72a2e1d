use std::path::PathBuf;

use crate::model::LatentFactors;
use crate::optim::FitReport;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{}: line {line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("fit diverged at iteration {}", .0.report.iterations)]
    Diverged(Box<Diverged>),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Last finite state of a fit whose loss stopped being finite.
#[derive(Debug, Clone)]
pub struct Diverged {
    pub last_finite: LatentFactors,
    pub report: FitReport,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
