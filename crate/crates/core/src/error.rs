use thiserror::Error;

/// Errors produced by the transport solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("steady state is not unique: numerical null space has dimension {nullity}")]
    NonUniqueSteadyState { nullity: usize },

    #[error("no stationary solution meets the residual bound (relative residual {residual:e}, bound {bound:e})")]
    SingularSystem { residual: f64, bound: f64 },

    #[error("eigenbasis is ill-conditioned (condition estimate {condition:e})")]
    IllConditionedEigenbasis { condition: f64 },

    #[error("Schur iteration did not converge")]
    EigenSolverFailed,

    #[error("reduced Liouvillian is singular: the excitation never leaves through the sink")]
    SingularReducedLiouvillian,

    #[error("{quantity} diverges for the given arguments")]
    Divergent { quantity: &'static str },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("maximum sits on the grid boundary (index {index} of {len}, value {value}); widen the grid")]
    GridTooCoarse { index: usize, len: usize, value: f64 },

    #[error("{n_sites} qubits exceed the dimension cap of {cap}")]
    DimensionCapExceeded { n_sites: usize, cap: usize },

    #[error("Green's function is singular at omega = {omega}")]
    SingularMatrix { omega: f64 },

    #[error("self-energy on site {site} at omega = {omega} is not retarded (Im = {imag:e} > 0)")]
    NonCausalSelfEnergy { site: usize, omega: f64, imag: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
