use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry (n = {n}, k = {k}): need n >= 2 and 1 <= k <= n - 1")]
    InvalidGeometry { n: usize, k: usize },

    #[error("{what} is only defined for even degrees, got j = {j}")]
    OddDegree { what: &'static str, j: usize },

    #[error("Jacobi parameters must both exceed -1, got (rho, sigma) = ({rho}, {sigma})")]
    JacobiParams { rho: f64, sigma: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("symmetric tridiagonal eigen-solver did not converge for order {order}")]
    EigenNoConvergence { order: usize },

    #[error("kernel is not integrable against the radial weight: {reason} (truncated integral estimate {estimate:.3e})")]
    KernelNotIntegrable { reason: String, estimate: f64 },

    #[error("expected a function of pure degree {expected}, found degree {found}")]
    MixedDegree { expected: usize, found: usize },

    #[error("frame is not column-orthonormal (|v^T v - I|_F = {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("coefficient index {0} is not part of the basis")]
    UnknownIndex(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
