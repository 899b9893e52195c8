use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid state vector: {0}")]
    InvalidStateVector(String),

    #[error("degenerate filter: A - aI vanishes")]
    DegenerateFilter,

    #[error("filter annihilated the input (squared norm {0:e})")]
    FilteredToZero(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no counts recorded")]
    NoCounts,

    #[error("incomplete tomography: {0}")]
    IncompleteTomography(String),

    #[error("invalid counts record: {0}")]
    InvalidCounts(String),

    #[error("singular partial trace while normalizing a Choi operator")]
    SingularPartialTrace,
}

pub type Result<V> = std::result::Result<V, Error>;
