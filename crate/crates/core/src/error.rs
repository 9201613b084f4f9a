use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A change log record that does not follow the numstat grammar.
    #[error("{}line {line}: {message}", .file.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Input carries no information for the requested quantity, e.g. an
    /// empty window or an edgeless co-change graph.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the message with the file it came from. I/O errors already
    /// carry their path and are returned untouched.
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: None,
            line,
            message: message.into(),
        }
    }

    pub fn in_file(self, path: &std::path::Path) -> Self {
        let p = path.display();
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                file: Some(path.to_path_buf()),
                line,
                message,
            },
            Error::Config(m) => Error::Config(format!("{p}: {m}")),
            Error::Validation(m) => Error::Validation(format!("{p}: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("{p}: {m}")),
            Error::Lookup(m) => Error::Lookup(format!("{p}: {m}")),
            other => other,
        }
    }

    /// True for failures caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv { source, .. } => source.is_io_error(),
            _ => false,
        }
    }
}
