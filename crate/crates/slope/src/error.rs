use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] slope_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{0}")]
    CellFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 3 for a missing convergence certificate, 1 for
    /// everything else (bad data, bad parameters, unreadable files).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(slope_core::Error::Certificate { .. }) | Error::CellFailed(_) => 3,
            _ => 1,
        }
    }
}
