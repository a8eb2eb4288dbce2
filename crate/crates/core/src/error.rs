use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: u32, n: usize },
    #[error("edge {edge:?} must have exactly {expected} distinct vertices")]
    BadEdge { edge: Vec<u32>, expected: usize },
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Vec<u32>),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("pattern with {r} vertices exceeds the analysis cap of {cap}")]
    PatternTooLarge { r: usize, cap: usize },
    #[error("operation requires u = 2, pattern has u = {0}")]
    RequiresGraph(usize),
    #[error("1-density undefined for fewer than two vertices")]
    DensityUndefined,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("integer overflow computing {0}")]
    Overflow(&'static str),
    #[error("search budget of {budget} nodes exceeded in {what}")]
    BudgetExceeded { what: &'static str, budget: u64 },
    #[error("inconsistent coupling state: {0}")]
    InconsistentState(String),
    #[error("process never reached the hitting condition")]
    NeverHit,
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
