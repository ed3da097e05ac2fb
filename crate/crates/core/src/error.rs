use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("leading coefficient l_0 is singular at x = {x}")]
    SingularLeadingCoefficient { x: f64 },
    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),
    #[error("boundary matrix has rank {rank} < {expected}")]
    RankDeficientBoundary { rank: usize, expected: usize },
    #[error("completed boundary matrix is singular (cond = {cond:e})")]
    SingularCompletion { cond: f64 },
    #[error("stacked boundary matrix is numerically singular")]
    NumericallySingularU,
    #[error("pencil F + lambda G is not regular")]
    DegeneratePencil,
    #[error("vanishing denominator {value:e} (scale {scale:e})")]
    VanishingDenominator { value: f64, scale: f64 },
    #[error("lambda dependence is not polynomial of degree {degree}")]
    NonPolynomialLambda { degree: usize },
    #[error("discretized pencil is singular")]
    SingularPencil,
    #[error("eigenvalue matching is ambiguous at eps = {eps:e}")]
    MatchingAmbiguous { eps: f64 },
    #[error("found {found} of {expected} branches near lambda0 at eps = {eps:e}")]
    BranchesNotFound {
        eps: f64,
        found: usize,
        expected: usize,
    },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("profile mean is {mean:e}, expected zero")]
    ZeroMeanViolated { mean: f64 },
    #[error("{what} residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge {
        what: String,
        residual: f64,
        tol: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
