use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: input/configuration problems
/// (`is_validation() == true`) and numerical failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("under-resolved grid: {0}")]
    Resolution(String),

    #[error("compatibility integral {integral:.3e} exceeds tolerance {tolerance:.3e}")]
    Solvability { integral: f64, tolerance: f64 },

    #[error(
        "Picard iteration failed after {iterations} sweeps (kernel mass {kernel_mass:.3e}, last change {last_change:.3e})"
    )]
    IterationFailure {
        kernel_mass: f64,
        iterations: usize,
        last_change: f64,
    },

    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("integration failed at step {step} (t = {time:.6e}): {reason}")]
    Integration {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("no interface crossing found: {0}")]
    NotLayered(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::InvalidFrame(_)
                | Error::Domain(_)
                | Error::Config(_)
                | Error::GridMismatch(_)
                | Error::Resolution(_)
                | Error::StabilityViolation { .. }
                | Error::Io(_)
        )
    }

    /// Process exit code used by the batch front end.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            2
        } else {
            3
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
