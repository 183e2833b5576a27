use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Fingerprint(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Fingerprint(_) => 4,
            CliError::Parse { .. } | CliError::Data(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Fingerprint(_) => "fingerprint",
            CliError::Parse { .. } => "parse",
            CliError::Data(_) => "data",
        }
    }

    /// One line: `error kind=<kind> code=<code> message=<text>`.
    pub fn to_line(&self) -> String {
        error_line(self.kind(), self.exit_code(), &self.to_string())
    }
}

pub fn error_line(kind: &str, code: i32, message: &str) -> String {
    let flat: String = message
        .trim()
        .chars()
        .map(|c| if c == '\n' || c == '\r' || c == '\t' { ' ' } else { c })
        .collect();
    format!("error kind={kind} code={code} message={flat}")
}

impl From<tagrec_core::FolksonomyError> for CliError {
    fn from(e: tagrec_core::FolksonomyError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<tagrec_core::TopicError> for CliError {
    fn from(e: tagrec_core::TopicError) -> Self {
        match e {
            tagrec_core::TopicError::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<tagrec_core::RecommendError> for CliError {
    fn from(e: tagrec_core::RecommendError) -> Self {
        match e {
            tagrec_core::RecommendError::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Data(other.to_string()),
        }
    }
}
