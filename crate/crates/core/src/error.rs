use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed NetPBM input.
    #[error("image parse error at byte {offset}: {message}")]
    ImageParse { offset: usize, message: String },

    /// Malformed index file.
    #[error("index parse error on line {line}: {message}")]
    IndexParse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Query text contains a character with no shape code.
    #[error("unsupported character {ch:?} at position {position}")]
    UnsupportedChar { ch: char, position: usize },

    #[error("region contains no ink")]
    NoInk,

    #[error("page image for document {doc_id:?} is not available: {reason}")]
    MissingPage { doc_id: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn image(offset: usize, message: impl Into<String>) -> Self {
        Error::ImageParse { offset, message: message.into() }
    }

    pub(crate) fn index(line: usize, message: impl Into<String>) -> Self {
        Error::IndexParse { line, message: message.into() }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
