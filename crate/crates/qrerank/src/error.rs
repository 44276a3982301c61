use std::path::{Path, PathBuf};

use qrerank_core::corpus::CorpusError;
use qrerank_core::kernel::KernelError;
use qrerank_core::rankeval::RankError;
use qrerank_core::svm::SvmError;

/// Process exit status for each error class.
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{}: {message}", path.display())]
    File { path: PathBuf, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("kernel fingerprint mismatch: model has {model}, configuration has {current}")]
    FingerprintMismatch { model: String, current: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, line: usize, message: impl Into<String>) -> Error {
        Error::Format { path: path.to_path_buf(), line, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_USAGE,
            Error::Kernel(KernelError::InvalidConfig(_)) | Error::Svm(SvmError::InvalidConfig(_)) => EXIT_USAGE,
            Error::Corpus(CorpusError::Config(_)) => EXIT_USAGE,
            Error::Kernel(KernelError::DegenerateSelfKernel) => EXIT_NUMERIC,
            Error::Svm(SvmError::NotConverged(_) | SvmError::NotSymmetric(_)) => EXIT_NUMERIC,
            _ => EXIT_DATA,
        }
    }
}
