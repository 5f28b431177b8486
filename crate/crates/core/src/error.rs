use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("{what} did not converge: error estimate {error:.3e} exceeds tolerance {tol:.3e}")]
    Convergence { what: &'static str, error: f64, tol: f64 },

    #[error("M is ill-conditioned at z = {z} (rcond {rcond:.3e}, det ≈ {det:.3e}); a bound state is close")]
    NearBoundState { z: Complex64, rcond: f64, det: Complex64 },

    #[error("invalid junction: {0}")]
    Junction(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { what, detail: detail.into() }
    }

    /// Exit-status class used by front ends.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NearBoundState { .. })
    }
}
