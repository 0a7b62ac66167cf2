use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not upper Hessenberg: nonzero entry at ({row}, {col})")]
    NotHessenberg { row: usize, col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("triangular matrix is singular: diagonal entry {index} is below threshold")]
    SingularTriangular { index: usize },

    #[error("pencil is singular (det(beta*A - alpha*B) vanishes identically)")]
    DegeneratePencil,

    #[error("QZ iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("right-hand side is the zero vector")]
    ZeroRhs,

    #[error("Krylov space exhausted: cannot step past dimension {0}")]
    ExhaustedSpace(usize),

    #[error("Arnoldi process already broke down at step {0}")]
    AfterBreakdown(usize),

    #[error("index {index} out of range (valid: {valid})")]
    IndexOutOfRange { index: usize, valid: String },

    #[error("harmonic pair is infinite; no residual vector is defined")]
    InfinitePair,

    #[error("Krylov matrix is ill-conditioned (condition {0:.3e}); residual-polynomial oracle unavailable")]
    IllConditionedKrylov(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("residual r_(m-1) already vanishes; stagnation theory is inapplicable")]
    AlreadyConverged,

    #[error("step {0} is stagnated; use the stagnation form of the coincidence check")]
    StagnatedStep(usize),

    #[error("step {0} is not stagnated")]
    NotStagnated(usize),

    #[error("inconsistent state: {0}")]
    InconsistentState(String),

    #[error("generator failure: {0}")]
    GeneratorFailure(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
