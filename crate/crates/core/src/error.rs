use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported constellation order {0} (expected 2, 4, 16 or 64)")]
    UnsupportedOrder(usize),

    #[error("invalid rotation parameters: {0}")]
    Rotation(String),

    #[error("invalid code parameters: {0}")]
    CodeParams(String),

    #[error("invalid grouping: {0}")]
    Grouping(String),

    #[error("search space too large: {0}")]
    Guard(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
