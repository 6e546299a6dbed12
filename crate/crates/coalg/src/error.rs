use thiserror::Error;

/// Errors shared by every layer of the crate.
///
/// `Size` is the loud-failure path for enumerations: operations that would
/// materialize more elements than the configured cap refuse to run rather
/// than truncate silently.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs that do not fit together: mismatched carriers, codomains,
    /// a relation handed to an operation expecting an equivalence, and so on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed the configured cap. `count` is exact when
    /// `exact` is true, otherwise a lower bound (counting saturated).
    #[error("size limit exceeded: would need {}{count} elements, cap is {cap}", if *.exact { "" } else { "at least " })]
    Size { count: u128, exact: bool, cap: u64 },

    /// A value does not have the shape the functor expression prescribes.
    #[error("shape error: {0}")]
    Shape(String),

    /// Text in the functor-expression / element grammar failed to parse.
    /// `at` is a byte offset into the input.
    #[error("parse error at offset {at}: {message}")]
    Parse { at: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
