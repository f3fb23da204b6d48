//! Error taxonomy shared across the library.
//!
//! The variants map onto the distinct failure modes of the pipeline:
//! bad user input, a state outside the physical family, numerical
//! trouble (non-convergence, eigensolver noise, truncation), regimes
//! where a requested quantity is not defined, and cutoff exhaustion in
//! the Fock-basis oracle.

use num_complex::Complex64;

/// A physicality check that failed, naming the violated inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum StateViolation {
    /// `A_i0 >= 1/2` failed for the given mode (1-based).
    ModeBelowVacuum { mode: usize, value: f64 },
    /// `A10*A20 - |B0|^2 >= 1/4` failed.
    UncertaintyProduct { value: f64 },
    /// A parameter is NaN or infinite.
    NonFinite { field: &'static str },
}

impl std::fmt::Display for StateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateViolation::ModeBelowVacuum { mode, value } => write!(
                f,
                "mode {mode} coefficient {value} violates A{mode}0 >= 1/2"
            ),
            StateViolation::UncertaintyProduct { value } => {
                write!(f, "A10*A20 - |B0|^2 = {value} violates the bound >= 1/4")
            }
            StateViolation::NonFinite { field } => write!(f, "{field} is not finite"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unphysical state: {0}")]
    Unphysical(StateViolation),

    /// An iterative scheme hit its refinement cap before meeting its
    /// tolerance. Carries the last two iterates so callers can judge
    /// how bad the residual actually is.
    #[error("did not converge within the refinement cap: last={last}, previous={previous}")]
    NonConvergent { last: Complex64, previous: Complex64 },

    /// Eigensolver or series arithmetic produced something outside its
    /// guaranteed envelope (e.g. spurious imaginary parts).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Adaptive truncation could not certify the requested tolerance.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// The requested quantity is not defined for this state/regime.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Inputs sit exactly on a pole of a closed-form expression.
    #[error("singular input: {0}")]
    SingularInput(String),

    /// The Fock-basis oracle detected population escaping through the
    /// truncation boundary beyond the allowed budget.
    #[error("Fock cutoff too small: boundary leakage {leakage:.3e} exceeds {limit:.3e}")]
    CutoffTooSmall { leakage: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
