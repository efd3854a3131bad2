use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("series did not converge: {0}")]
    Convergence(String),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("no root matches selector {0}")]
    NoRoot(String),
    #[error("selector {0} matches {1} roots")]
    AmbiguousRoot(String, usize),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("syntax error at {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("unbound parameter {0}")]
    Unbound(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("empty sampling domain: {0}")]
    EmptyDomain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("in {path}: {inner}")]
    Eval { path: String, inner: Box<Error> },
}

impl Error {
    /// Wraps an error with one more breadcrumb. Nested crumbs are joined
    /// outermost first.
    pub fn at(self, crumb: &str) -> Error {
        match self {
            Error::Eval { path, inner } => Error::Eval {
                path: format!("{crumb} > {path}"),
                inner,
            },
            other => Error::Eval {
                path: crumb.to_string(),
                inner: Box::new(other),
            },
        }
    }

    /// The innermost error, with breadcrumbs stripped.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Eval { inner, .. } => inner.root_cause(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
