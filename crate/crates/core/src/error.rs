use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no interactions in {0}")]
    NoInteractions(PathBuf),

    #[error("items without a label entry: {0:?}")]
    UnknownItems(Vec<String>),

    #[error("no users survive filtering")]
    NoSurvivingUsers,

    #[error("user {user} has {count} target positives, at least {required} are required")]
    TooFewPositives {
        user: String,
        count: usize,
        required: usize,
    },

    #[error("cannot sample {requested} negatives: only {available} non-interacted items")]
    InsufficientNegatives { requested: usize, available: usize },

    #[error("auxiliary vector for user {user}: {message}")]
    AuxVector { user: String, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite {what} ({context})")]
    NonFinite { what: String, context: String },

    #[error("missing loss component `{component}` for variant {variant}")]
    MissingComponent { component: &'static str, variant: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("bundle format: {0}")]
    BundleFormat(String),

    #[error("{}: {source}", path.display())]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// `fs::read` with the path kept in the error.
pub(crate) fn read_file(path: impl AsRef<std::path::Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    std::fs::read(path).map_err(|source| Error::ReadFile {
        path: path.to_path_buf(),
        source,
    })
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line tool: 1 usage, 2 data,
    /// 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::NonFinite { .. } => 3,
            _ => 2,
        }
    }
}
