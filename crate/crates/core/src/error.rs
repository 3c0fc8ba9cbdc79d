use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pulse undersampled: {sample_rate} S/s is below the required {required} S/s")]
    UndersampledPulse { sample_rate: f64, required: f64 },

    #[error("sample rate mismatch: {0} S/s vs {1} S/s")]
    RateMismatch(f64, f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration conflict: {0}")]
    ConfigConflict(String),

    #[error("demodulator for {expected} invoked with a {actual} configuration")]
    SchemeMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("energy-detection threshold has not been calibrated")]
    UncalibratedThreshold,

    #[error("synchronization search window must be at least one sample")]
    WindowTooSmall,

    #[error("stale reconfiguration: effective frame {effective_frame} is not after current frame {current_frame}")]
    StaleRequest { effective_frame: u64, current_frame: u64 },

    #[error("unknown TH code `{0}`")]
    UnknownCode(String),

    #[error("sweeps do not share the same Eb/N0 grid and bit budget")]
    GridMismatch,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at Eb/N0 = {ebn0_db} dB: {source}")]
    AtGridPoint {
        ebn0_db: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("reconfiguration request #{index}: {source}")]
    AtRequest {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True when the root cause is a filesystem failure.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::AtGridPoint { source, .. } | Error::AtRequest { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
