use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building or running a computation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{0} is not a member of the Boolean algebra")]
    NotInAlgebra(String),

    #[error(
        "partition does not refine the expectation blocks: atom {atom} meets more than one block"
    )]
    NotRefinement { atom: usize },

    #[error("enumeration bound exceeded: {atoms} atoms > bound {bound}")]
    OracleBoundExceeded { atoms: usize, bound: usize },

    #[error("weights must be strictly positive (coordinate {index})")]
    NonPositiveWeight { index: usize },

    #[error("theta must be greater than 1, got {0}")]
    InvalidTheta(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("coordinate {index} is negative")]
    NegativeCoordinate { index: usize },

    #[error("depth must be a positive integer")]
    InvalidDepth,

    #[error("range violation: image of coordinate indicator {coordinate} is not constant on block {block}")]
    RangeViolation { coordinate: usize, block: usize },

    #[error("homogeneity violation: f(r*chi_{coordinate}) != r*f(chi_{coordinate}) for block indicator r of block {block}")]
    HomogeneityViolation { coordinate: usize, block: usize },

    #[error("representation check failed at coordinate {0}")]
    VerificationFailure(usize),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}
