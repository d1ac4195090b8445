use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A probability row is negative somewhere or does not sum to one.
    #[error("{field} is not a probability distribution (sum = {sum})")]
    InvalidDistribution { field: String, sum: f64 },

    #[error("{field} has length {found}, expected {expected}")]
    Shape { field: String, expected: usize, found: usize },

    /// Two objects that must compose disagree on the size of an axis.
    #[error("dimension mismatch on {axis}: {left} vs {right}")]
    DimensionMismatch { axis: &'static str, left: usize, right: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("terminal state {state} does not self-loop under action {action}")]
    TerminalNotAbsorbing { state: usize, action: usize },

    #[error(
        "enumerating {candidates} deterministic decision policies exceeds the budget of {budget}; \
         use the empirical learner path instead"
    )]
    EnumerationBudget { candidates: f64, budget: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    NumericalFailure { residual: f64, tolerance: f64 },

    #[error("token table grew past {budget} tokens; use a smaller mask region")]
    TokenBudget { budget: usize },

    #[error("maze configuration cannot be solved")]
    Unsolvable,

    #[error("cannot step a terminal maze state")]
    SteppedTerminal,

    #[error("{0}")]
    Invalid(String),
}
