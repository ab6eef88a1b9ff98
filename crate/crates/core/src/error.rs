use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Validation problems (bad parameters, malformed specs) are kept separate from
/// numerical failures so the CLI can map them to different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty chain")]
    EmptyChain,

    #[error("factored form required")]
    FactoredFormRequired,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("function supplies derivatives up to order {available}, operator needs {required}")]
    InsufficientSmoothness { required: usize, available: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(format!($($arg)*))
    };
}
pub(crate) use invalid;
