use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The shooting bisection did not bracket or converge within its cap.
    #[error("shooting bisection failed: {0}")]
    BracketingFailure(String),

    /// The integrated profile left the positive decaying branch early.
    #[error("negative-u excursion at s = {0}: shooting parameter left the ground-state branch")]
    NegativeExcursion(f64),

    /// An iterative solver ran out of iterations.
    #[error("{what} did not converge within {cap} iterations")]
    NoConvergence { what: &'static str, cap: usize },

    /// Newton step left the admissible region or hit a singular Hessian.
    #[error("Newton solve failed: {0}")]
    NewtonFailure(String),

    /// A contraction solve observed ratio ≥ 1 and was aborted.
    #[error("contraction failed: ratio {ratio:.3} ≥ 1 over {span} consecutive iterations")]
    ContractionFailure { ratio: f64, span: usize },

    /// Decay of a field at the grid boundary was insufficient for a
    /// free-space solve.
    #[error("boundary decay violated: boundary max {boundary:.3e} vs interior max {interior:.3e}")]
    BoundaryDecay { boundary: f64, interior: f64 },

    /// Gram matrix of constraint functionals was numerically singular.
    #[error("singular constraint Gram matrix (pivot {0:.3e}): grid under-resolved")]
    SingularGram(f64),

    /// Table file had an unsupported version tag.
    #[error("unsupported table version: got {got:?}, expected {expected:?}")]
    VersionMismatch { got: String, expected: &'static str },

    /// Table file failed to parse.
    #[error("malformed table: {0}")]
    MalformedTable(String),

    /// A loaded table violated a structural invariant.
    #[error("table invariant violated: {0}")]
    InvariantViolation(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
