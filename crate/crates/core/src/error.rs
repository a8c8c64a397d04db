use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A plant step produced a non-finite state.
    #[error("simulation fault: non-finite state {values:?}")]
    SimulationFault { values: Vec<f64> },

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An iterative solver ran out of iterations.
    #[error("{solver} did not converge after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
    },

    /// A polynomial has no root inside the search bracket.
    #[error("no positive root in [{lo:e}, {hi:e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("non-finite gradient at parameter {index}")]
    NonFiniteGradient { index: usize },

    #[error("non-finite {term} term in loss")]
    NonFiniteLoss { term: &'static str },

    /// Mismatched lengths, shapes or parameter counts.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

impl Error {
    /// True for faults that stem from floating-point blow-ups rather than bad
    /// inputs or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SimulationFault { .. }
                | Error::NoConvergence { .. }
                | Error::NoRoot { .. }
                | Error::NonFiniteGradient { .. }
                | Error::NonFiniteLoss { .. }
        )
    }
}
