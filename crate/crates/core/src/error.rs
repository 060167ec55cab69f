use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid game specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The player's cost has no curvature in its own action.
    #[error("singular problem: {0}")]
    SingularProblem(String),

    #[error("degenerate game ({context}): pivot {pivot} has magnitude {magnitude:e}")]
    DegenerateGame { context: String, pivot: usize, magnitude: f64 },

    #[error("degenerate incentive gain: {0}")]
    DegenerateGain(String),

    #[error("degenerate limit: {0}")]
    DegenerateLimit(String),

    #[error("unsupported parameterization: {0}")]
    UnsupportedParameterization(String),
}

impl Error {
    /// True for the failures the CLI maps to exit code 2.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::SingularProblem(_)
                | Error::DegenerateGame { .. }
                | Error::DegenerateGain(_)
                | Error::DegenerateLimit(_)
                | Error::UnsupportedParameterization(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
