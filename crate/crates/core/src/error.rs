use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid algebra parameters: {0}")]
    InvalidAlgebra(String),
    #[error("scalar {0} does not belong to the commutative algebra")]
    NotInAlgebra(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a line needs two distinct points")]
    DegenerateLine,
    #[error("point set is neither a left nor a right affine subspace")]
    SideUnrepresentable,
    #[error("subspace is not two-sided")]
    NotTwoSided,
    #[error("ambient dimension {n} is too small (need at least {min})")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("expected a {expected}-dimensional subspace, found dimension {found}")]
    WrongSubspaceDimension { expected: usize, found: usize },
    #[error("matrix row {row} is zero")]
    ZeroRow { row: usize },
    #[error("matrix row {row} is not a scalar multiple of a central vector")]
    NotCentralRow { row: usize },
    #[error("row scale ratio a_{i}^-1 a_{j} is not central")]
    NonCentralRatio { i: usize, j: usize },
    #[error("matrix is not invertible")]
    SingularMatrix,
    #[error("map is not additive: {0}")]
    NotAdditive(String),
    #[error("inconsistent scalar twist: {0}")]
    InconsistentAlpha(String),
    #[error("twist does not reverse products: {0}")]
    NotAntiMultiplicative(String),
    #[error("no morphism of the requested kind matches: {0}")]
    NoSolution(String),
    #[error("reconstructed map disagrees with the input: {0}")]
    ReconstructionMismatch(String),
    #[error("side behaviour of the map is inconsistent: {0}")]
    ModeMismatch(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
