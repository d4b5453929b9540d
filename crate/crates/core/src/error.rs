use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("the zero polynomial has no well-defined root set")]
    ZeroPolynomial,
    #[error("root finder did not converge (residual {residual:e})")]
    NonConvergence { best: Vec<Complex64>, residual: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("operator is identically zero")]
    ZeroOperator,
    #[error("operator is not exactly solvable (Fuchs index {0})")]
    NotExactlySolvable(i64),
    #[error("resonant spectrum: lambda_{index} coincides with lambda_{n}")]
    ResonantSpectrum { n: usize, index: usize },
    #[error("leading coefficient of the operator is constant")]
    ConstantLeadingCoefficient,
    #[error("operator restricted to polynomials of degree <= {0} is singular or raises degree")]
    SingularRestriction(usize),
    #[error("bivariate polynomial has total degree {degree} > {k}")]
    DegreeTooHigh { degree: usize, k: usize },
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("T[(x-z)^n] is constant")]
    ConstantPsi,
    #[error("scale must be nonzero")]
    ZeroScale,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("empty input")]
    EmptyInput,
    #[error("image of linear polynomials does not depend on z; no rational dynamics")]
    DegenerateImage,
    #[error("rational map has degree {0} < 2")]
    DegreeTooLow(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
