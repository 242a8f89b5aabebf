use thiserror::Error;

use crate::geometric::GeometricResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for dimension {dim} (position {position})")]
    Index {
        position: usize,
        index: usize,
        dim: usize,
    },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("state is not normalized: <psi|psi> = {norm_sq}")]
    Normalization { norm_sq: f64 },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown factor label {label} (split has {factors} factors)")]
    Label { label: usize, factors: usize },

    #[error("size error: {0}")]
    Size(String),

    /// An update contracted the target against the other factors to the zero vector.
    #[error("factor {factor} contracted to zero; restart required")]
    ZeroContraction { factor: usize },

    #[error("no start converged after {max_sweeps} sweeps (best residual {:.3e})", best.residual)]
    Convergence {
        max_sweeps: usize,
        best: Box<GeometricResult>,
    },
}
