use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("eigenvalues {index} and {next} are not distinct (gap {gap:.3e} below tolerance {tolerance:.3e})", next = index + 1)]
    RepeatedEigenvalues {
        index: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error("ill-conditioned: {what} (estimate {estimate:.3e}, limit {limit:.3e})")]
    IllConditioned {
        what: String,
        estimate: f64,
        limit: f64,
    },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("order {order} outside the admissible range {min}..={max}")]
    OrderOutOfRange { order: i64, min: i64, max: i64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate coefficient {value:.3e} at derivative order {order}")]
    DegenerateCoefficient { order: usize, value: f64 },

    #[error("derivatives available through order {available}, order {required} required")]
    MissingDerivatives { required: usize, available: usize },

    #[error("{count} of {trials} samples exceeded condition number {limit:.1e}")]
    SingularSample { count: u64, trials: u64, limit: f64 },

    #[error("series does not converge at truncation order {order}: |term[{order}]| = {last:.3e} >= |term[{prev_order}]| = {previous:.3e}", prev_order = order.saturating_sub(1))]
    ConvergenceWarning {
        order: usize,
        previous: f64,
        last: f64,
    },

    #[error("empty lambda grid")]
    EmptyGrid,

    #[error("every grid point was rejected; first rejection: {first}")]
    AllRejected { first: Box<Error> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error: {0}")]
    Format(String),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Conditioning,
    Convergence,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::IllConditioned { .. }
            | Error::SingularSample { .. }
            | Error::DegenerateCoefficient { .. } => ErrorClass::Conditioning,
            Error::NoConvergence { .. } | Error::ConvergenceWarning { .. } => {
                ErrorClass::Convergence
            }
            Error::AllRejected { first } => first.class(),
            _ => ErrorClass::Validation,
        }
    }

    /// Stable snake_case identifier for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_error",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::RepeatedEigenvalues { .. } => "repeated_eigenvalues",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Domain(_) => "domain_error",
            Error::OrderOutOfRange { .. } => "order_out_of_range",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateCoefficient { .. } => "degenerate_coefficient",
            Error::MissingDerivatives { .. } => "missing_derivatives",
            Error::SingularSample { .. } => "singular_sample",
            Error::ConvergenceWarning { .. } => "convergence_warning",
            Error::EmptyGrid => "empty_grid",
            Error::AllRejected { .. } => "all_rejected",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Format(_) => "format_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
