use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidParams(String),

    #[error("parameter mismatch: left is SL{0}(F_{1}), right is SL{2}(F_{3})")]
    ParamsMismatch(u8, u32, u8, u32),

    #[error("matrix is not in SL{n}(F_{p}): determinant is {det}")]
    NotInGroup { n: u8, p: u32, det: u32 },

    #[error("code {0} does not decode to a group element")]
    InvalidCode(u128),

    #[error("resource cap exceeded: limit {limit}, reached at least {reached}")]
    CapExceeded { limit: usize, reached: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("set is not closed under the group law")]
    NotClosed,

    #[error("element is not regular semisimple")]
    NotRegularSemisimple,

    #[error("search exhausted up to radius {radius}")]
    Exhausted { radius: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
