use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index, coordinate or window falls outside the grid or axis.
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("validation failed: {0}")]
    Validation(String),

    /// Scenario file did not match the schema; `path` is the dotted field path.
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    /// Malformed binary or CSV input.
    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: u64, message: String },

    #[error("sensors `{first}` and `{second}` both match region `{region}`")]
    Ambiguous {
        first: String,
        second: String,
        region: String,
    },

    #[error("unmatched sensors: {0:?}")]
    Unmatched(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
