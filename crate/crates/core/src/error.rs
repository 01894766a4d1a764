use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the spectral shift toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix within {iterations} iterations")]
    EigenNonConvergence { dim: usize, iterations: usize },

    #[error("pole at {pole} collides with node {node}")]
    PoleCollision { pole: Complex64, node: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("basic spline needs at least two distinct nodes, got {0:?}")]
    DegenerateSpline(Vec<f64>),

    #[error("atom budget exceeded: order {order} over {distinct} eigenvalues needs {required} > {budget}; reduce the order or the dimension")]
    Capacity {
        order: usize,
        distinct: usize,
        required: u128,
        budget: u128,
    },

    #[error("symmetrized measure integral has imaginary residue {residue:e} above {tolerance:e}")]
    SymmetryViolation { residue: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
