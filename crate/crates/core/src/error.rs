use thiserror::Error;

/// Errors raised by the numerical and geometric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("symmetry error: asymmetry {0:.3e} exceeds tolerance")]
    Symmetry(f64),
    #[error("branch error: eigenvalue {0} lies on the closed negative real axis")]
    Branch(String),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("algebra error: vectors belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("closure error: residual {0:.3e} outside the algebra span")]
    Closure(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("signature error: form restricted to the complement is not positive definite (min eigenvalue {0:.3e})")]
    Signature(f64),
    #[error("reductivity error: {0}")]
    Reductivity(String),
    #[error("chain error: {0}")]
    Chain(String),
    #[error("degenerate metric: lambda at 0-based index {index} is zero")]
    DegenerateMetric { index: usize },
    #[error("domain error: vector has h-component {0:.3e}")]
    Domain(f64),
    #[error("index error: {0}")]
    Index(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("comparison error: {0}")]
    Comparison(String),
}

pub type Result<T> = std::result::Result<T, Error>;
