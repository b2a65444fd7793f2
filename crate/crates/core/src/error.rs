use std::fmt;

use thiserror::Error;

/// Which stepsize predicate a configuration failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPredicate {
    /// `sigma > 0`, `tau > 0`, `theta` in `[0, 1]`.
    Domain,
    /// `sigma * rho < 1`.
    PrimalProx,
    /// `sqrt(sigma * tau) * ||L|| < 1`.
    Coupling,
    /// `sigma * rho + theta * sqrt(sigma * tau) * ||L|| < 1`.
    DualFirst,
    /// `sigma * rho + sqrt(sigma * tau) * ||L|| < 1`.
    PrimalFirst,
    /// `gamma * rho < 1` for a single prox call.
    ProxStep,
}

impl fmt::Display for StepPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepPredicate::Domain => "sigma>0, tau>0, theta in [0,1]",
            StepPredicate::PrimalProx => "sigma*rho < 1",
            StepPredicate::Coupling => "sqrt(sigma*tau)*|L| < 1",
            StepPredicate::DualFirst => "sigma*rho + theta*sqrt(sigma*tau)*|L| < 1",
            StepPredicate::PrimalFirst => "sigma*rho + sqrt(sigma*tau)*|L| < 1",
            StepPredicate::ProxStep => "gamma*rho < 1",
        };
        f.write_str(s)
    }
}

/// A failed stepsize predicate: `value` must be strictly below `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepViolation {
    pub predicate: StepPredicate,
    pub value: f64,
    pub bound: f64,
}

impl StepViolation {
    /// How far the predicate is from holding (`value - bound`, nonnegative on failure).
    pub fn excess(&self) -> f64 {
        self.value - self.bound
    }
}

impl fmt::Display for StepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated: {} >= {} (excess {:e})",
            self.predicate,
            self.value,
            self.bound,
            self.excess()
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("stepsize violation: {0}")]
    StepsizeViolation(StepViolation),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("proximal map unavailable for {0}")]
    ProxUnavailable(String),
    #[error("subdifferential oracle unavailable for {0}")]
    SubdiffUnavailable(String),
    #[error("problem has no saddle set")]
    MissingSaddleSet,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("starting distance {dist} is not inside the ball of radius {radius}")]
    OutOfBall { dist: f64, radius: f64 },
    #[error("malformed PGM at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },
    #[error("unknown experiment '{name}' (known: {known})")]
    UnknownExperiment { name: String, known: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
