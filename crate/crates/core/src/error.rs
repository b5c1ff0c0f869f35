use thiserror::Error;

/// Errors reported by construction, validation, and the solvers.
///
/// Diagnostic payloads are plain `f64` regardless of the scalar the model
/// runs at; they exist for messages, not for further arithmetic.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {x} outside admissible domain (bound {bound})")]
    DomainViolation { x: f64, bound: f64 },

    #[error("capital stock must be nonnegative, got {k}")]
    NegativeCapital { k: f64 },

    #[error("weights must lie on the simplex; components sum to {sum}")]
    SimplexViolation { sum: f64 },

    #[error("weight vector has no positive component")]
    AllZeroWeights,

    #[error("invalid discount profile: {0}")]
    InvalidDiscounts(String),

    #[error("agent {agent} assigned share {share} at or below admissible bound {bound}")]
    InteriorityViolation {
        agent: usize,
        share: f64,
        bound: f64,
    },

    #[error("bisection bracket not found on [{lo}, {hi}] (gap {gap_lo} .. {gap_hi})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        gap_lo: f64,
        gap_hi: f64,
    },

    #[error("no feasible saving choice at period {period}, capital {capital}")]
    EmptyFeasibleSet { period: usize, capital: f64 },

    #[error("iteration failed to converge after {iterations} steps (sup diff {sup_diff})")]
    NonConvergence { iterations: usize, sup_diff: f64 },

    #[error("simulated path left the capital grid at period {period} (capital {capital})")]
    PathEscapedGrid { period: usize, capital: f64 },

    #[error("no consumption level attains the required utility {value}")]
    InfeasibleIndifference { value: f64 },

    #[error("no interior solution: {0}")]
    NoInteriorSolution(String),

    #[error("ordering violation: {0}")]
    OrderingViolation(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
