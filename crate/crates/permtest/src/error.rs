use std::path::PathBuf;

/// Errors surfaced by the batch tooling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("format: {}{msg}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Format { line: Option<u64>, msg: String },
    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        #[source]
        source: permtest_core::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code: 1 usage/config/IO, 2 data format, 3 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Config(_) | Error::Json(_) => 1,
            Error::Format { .. } | Error::Core { .. } => 2,
            Error::Invariant(_) => 3,
        }
    }
}

pub(crate) trait CoreContext<T> {
    fn context(self, context: &'static str) -> Result<T>;
}

impl<T> CoreContext<T> for std::result::Result<T, permtest_core::Error> {
    fn context(self, context: &'static str) -> Result<T> {
        self.map_err(|source| Error::Core { context, source })
    }
}
