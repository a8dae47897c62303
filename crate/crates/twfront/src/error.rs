//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type for all library operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem definition violates a structural invariant.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// The integral of D^(p'-1) g over (0,1) does not converge.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Adaptive quadrature exhausted its budget before reaching tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// The adaptive ODE stepper underflowed its step size.
    #[error("step failure: step size underflow at u = {u}")]
    StepFailure { u: f64 },

    /// The bisection bracket does not enclose a sign change.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// The profile integrand is singular strictly inside its range.
    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    /// Analytic and numeric edge classifications disagree.
    #[error("classification conflict: {0}")]
    ClassificationConflict(String),

    /// Exponents fall outside the region covered by the classification
    /// theorems.
    #[error("out of theorem scope: {0}")]
    OutOfTheoremScope(String),

    /// An intermediate value exceeded the representable floating range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The PDE simulation left the physically admissible range.
    #[error("instability detected: {0}")]
    InstabilityDetected(String),

    /// The simulated front failed to move over the observation window.
    #[error("non-propagation: {0}")]
    NonPropagation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
