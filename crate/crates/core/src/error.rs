use alloc::string::String;

/// Errors reported by solvers, generators, and oracles.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A partial sum left the 64-bit safe range; the trial is aborted.
    #[error("partial sum overflowed 64-bit range")]
    Overflow,
    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The exact oracle cannot handle the instance within its limits.
    #[error("instance too large for oracle (n > {max_n} and sum of |items| > {max_mass})")]
    OracleTooLarge { max_n: usize, max_mass: u64 },
    /// Backtracking could not match a sum at a checkpoint boundary.
    /// Indicates a forward/backward tie-rule mismatch and is treated as an
    /// internal consistency failure.
    #[error("unreachable sum {0} during reconstruction")]
    UnreachableSum(i64),
    /// The bounded-cardinality search has no feasible solution.
    #[error("no feasible solution under cardinality bound {0}")]
    Infeasible(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: &str) -> Self {
        Error::InvalidParameter(String::from(msg))
    }
}
