use thiserror::Error;

/// Errors raised by the numerical kernels and protocol runners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary: ‖U†U − 1‖_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("target energy {target} outside the attainable open interval ({lower}, {upper})")]
    EnergyOutOfRange { target: f64, lower: f64, upper: f64 },

    #[error("root finding for the inverse temperature did not converge (residual {residual:.3e})")]
    BetaNotConverged { residual: f64 },

    #[error("dual solver diverged: ‖(β, λ)‖_∞ = {norm:.3e} exceeds {bound:.1e}; constraints likely sit on the boundary of the attainable set")]
    DualDivergence { norm: f64, bound: f64 },

    #[error("conserved targets lie on the boundary of the attainable set: smallest eigenvalue of the max-entropy state {min_eigenvalue:.3e}, worst residual {residual:.3e}")]
    BoundaryTarget { min_eigenvalue: f64, residual: f64 },

    #[error("dual solver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    DualNotConverged { iterations: usize, residual: f64 },

    #[error("system too large: {modes} modes exceeds the limit of {limit}")]
    TooLarge { modes: usize, limit: usize },

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
