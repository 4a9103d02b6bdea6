use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Non-finite numbers, wrong shapes, or values violating a type invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The distinguished argument of a frame is zero, so no frame exists.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The caller combined arguments that do not belong together.
    #[error("usage error: {0}")]
    Usage(String),

    /// A tensor was passed where a different symmetry class is required.
    #[error("symmetry class error: {0}")]
    Class(String),

    /// A formula would divide by a vanishing quantity.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// Two eigenvalues (or singular values) are closer than the allowed gap.
    #[error("degenerate configuration: eigenvalues {i} and {j} differ by {gap:e} (minimum {gap_min:e})")]
    DegenerateConfiguration {
        i: usize,
        j: usize,
        gap: f64,
        gap_min: f64,
    },

    /// The argument lies outside the domain of a model (e.g. non-SPD strain).
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
