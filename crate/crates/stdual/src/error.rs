use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("dimension overflow")]
    DimensionOverflow,
    #[error("unitarity defect {defect:.3e} above tolerance")]
    NotUnitary { defect: f64 },
    #[error("branch singularity: {0}")]
    BranchSingularity(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("near-bifurcation orbit: eigenvalue within {distance:.2e} of one")]
    NearBifurcation { distance: f64 },
    #[error("quadrature did not converge")]
    Quadrature,
    #[error("degenerate fit window: {0}")]
    DegenerateFit(String),
    #[error("{0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
