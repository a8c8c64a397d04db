use std::path::PathBuf;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {detail}")]
    Config { path: String, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
    #[error("step {step}: {source}")]
    Episode {
        step: usize,
        #[source]
        source: pime_core::Error,
    },
    #[error(transparent)]
    Core(#[from] pime_core::Error),
}

impl HarnessError {
    pub fn config(path: impl Into<String>, detail: impl Into<String>) -> Self {
        HarnessError::Config { path: path.into(), detail: detail.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// 2 for numerical faults, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) | HarnessError::Episode { source: e, .. } if e.is_numeric() => 2,
            _ => 1,
        }
    }
}
