use crate::report::SolveReport;
use crate::residual::ResidualTable;
use crate::linalg::CMatrix;

/// Errors raised by the cone geometry, classical and quantum solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input")]
    Empty,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry {index} is not strictly positive ({value})")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("probability vector sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("kernel entry ({row}, {col}) is zero: projective diameter is infinite")]
    ZeroKernelEntry { row: usize, col: usize },

    #[error("negative projective diameter {0}")]
    NegativeDiameter(f64),

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (eigenvalues in [{min_eig:e}, {max_eig:e}])")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("matrix has trace {0}, expected 1")]
    BadTrace(f64),

    #[error("Kraus map is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("Kraus map is not positivity improving: {0}")]
    NotPositivityImproving(String),

    #[error("iterate left the positive definite cone at iteration {iteration}")]
    LeftCone {
        iteration: usize,
        iterate: Box<CMatrix>,
        report: Box<SolveReport>,
    },

    #[error("no convergence after {} iterations (last residual {:e})", .report.iterations, .report.final_residual)]
    NotConverged { report: Box<SolveReport> },

    #[error("verification failed: {}", .table.failures().join(", "))]
    VerificationFailed {
        table: ResidualTable,
        report: Box<SolveReport>,
    },

    #[error("composed Kraus map would have {count} coefficients (cap {cap})")]
    CompositionTooLarge { count: usize, cap: usize },

    #[error("vector is not unit norm (norm {0})")]
    NotUnitNorm(f64),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// The solve report carried by convergence and verification failures.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            Error::NotConverged { report }
            | Error::LeftCone { report, .. }
            | Error::VerificationFailed { report, .. } => Some(report),
            _ => None,
        }
    }
}
