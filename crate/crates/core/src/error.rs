use thiserror::Error;

/// Errors raised across the phaselab library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("caustic at t = {time:.6}: min jacobian {min_sigma:.3e} below floor {floor:.3e}")]
    Caustic { time: f64, min_sigma: f64, floor: f64 },

    #[error("leaves do not cover the momentum range at x = {x:.4} (edge density {edge_density:.3e})")]
    Coverage { x: f64, edge_density: f64 },

    #[error("operator is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("phase unwrapping failed: {0}")]
    PhaseUnwrap(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("picture mismatch: Heisenberg {heisenberg:.12} vs Schrodinger {schrodinger:.12}")]
    PictureMismatch { heisenberg: f64, schrodinger: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
