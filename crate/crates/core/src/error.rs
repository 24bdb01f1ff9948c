use alloc::string::String;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the enclosing space")]
    NotContained,
    #[error("frame columns are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("eigenspaces {0} and {1} are not orthogonal")]
    NonOrthogonalEigenspaces(usize, usize),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("operators belong to different conjugacy classes")]
    ClassMismatch,
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("spectrum does not match the signature: {0}")]
    SpectrumMismatch(String),
    #[error("S(d) enumeration is limited to k <= 8, got k = {0}")]
    TooManyEigenvalues(usize),
    #[error("permutation does not preserve multiplicities")]
    NotInSd,
    #[error("bad eigenvalue indices: {0}")]
    BadIndices(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("operators are not ({0},{1})-connected")]
    NotIJConnected(usize, usize),
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("operators are not mutually adjacent")]
    NotMutuallyAdjacent,
    #[error("operators do not form a clique: {0}")]
    NotAClique(String),
    #[error("clique orientation is ambiguous when a multiplicity equals 1")]
    AmbiguousOrientation,
    #[error("operators are not adjacent")]
    NotAdjacent,
    #[error("line structure needs both multiplicities > 1")]
    MultiplicityTooSmall,
    #[error("cliques lie in different connected components")]
    DifferentComponents,
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("this construction only exists for k = 2")]
    RequiresKEquals2,
}

pub type Result<T> = core::result::Result<T, Error>;
