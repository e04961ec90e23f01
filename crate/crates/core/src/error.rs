use std::path::PathBuf;

/// Errors raised by every layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum HdcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("accumulator is empty; nothing to threshold")]
    EmptyAccumulator,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("text too short: need at least {needed} symbols, got {got}")]
    TextTooShort { needed: usize, got: usize },

    #[error("associative memory holds no classes")]
    NotTrained,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<HdcError>,
    },
}

impl HdcError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdcError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        HdcError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with context layers peeled off.
    pub fn root(&self) -> &HdcError {
        match self {
            HdcError::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the error stems from user configuration (as opposed to bad data).
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            HdcError::InvalidArgument(_)
                | HdcError::DimensionMismatch { .. }
                | HdcError::Config(_)
                | HdcError::NotTrained
        )
    }
}

pub type Result<T> = std::result::Result<T, HdcError>;
