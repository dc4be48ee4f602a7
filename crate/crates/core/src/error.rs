use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative or non-finite weight {value} at cycle length {index}")]
    BadWeight { index: usize, value: f64 },

    #[error("weight row is identically zero")]
    ZeroWeights,

    #[error("count table covers n <= {max_n} (alpha = {alpha}), but n = {requested} was requested")]
    TableTooSmall {
        requested: usize,
        max_n: usize,
        alpha: usize,
    },

    #[error("prefix lattice has {required} points, above the cap of {cap}")]
    LatticeTooLarge { required: u128, cap: usize },

    #[error("{method} did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("rejection budget of {budget} attempts exhausted ({accepted} accepted, acceptance rate {rate:e})")]
    BudgetExceeded {
        budget: u64,
        accepted: u64,
        rate: f64,
    },

    #[error("function is not evaluable at z = {0}")]
    NotEvaluable(f64),

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("cache I/O: {0}")]
    Io(String),
}

impl Error {
    /// Numeric failures (budgets, convergence) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::BudgetExceeded { .. } | Error::LatticeTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
