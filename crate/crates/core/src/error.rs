use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary: ‖UU† − I‖_F = {deviation:.3e} exceeds {tol:.1e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("matrix is not Hermitian: ‖H − H†‖_F = {deviation:.3e} exceeds {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid matrix JSON: {0}")]
    MatrixFormat(String),

    #[error("invalid circuit JSON: {0}")]
    CircuitFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// `tr²m − tr m²` came out with a non-negligible imaginary part, which
    /// only happens when the determinant normalization is broken.
    #[error("imaginary part of g3 is {0:.3e}; invariant convention violated")]
    ConventionViolation(f64),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("outside the domain of the parameter formula: {0}")]
    Domain(String),

    #[error("solver did not converge (best residual {best_residual:.3e})")]
    Convergence { best_residual: f64 },

    #[error("no solution in the search region (best residual {best_residual:.3e})")]
    NotFound { best_residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
