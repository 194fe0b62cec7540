use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("right-hand side has norm {outside:e} outside the solver support (total {total:e})")]
    InconsistentRhs { outside: f64, total: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("mesh has no foil-winding elements")]
    EmptyWinding,
    #[error("coupling matrix X has rank {rank}, expected full column rank {expected}")]
    RankDeficientCoupling { rank: usize, expected: usize },
    #[error("conductance matrix is numerically singular (condition {condition:e})")]
    SingularConductance { condition: f64 },
    #[error("dense diagnostic refused: dimension {dim} exceeds limit {limit}")]
    SizeGuard { dim: usize, limit: usize },
    #[error("inductance L = {0:e} is not positive; gauging or excitation assumption violated")]
    NonpositiveL(f64),
    #[error(
        "G - Ge has eigenvalue {min_eig:e} below -{tol:e}; conductance assembly is inconsistent"
    )]
    IndefiniteDifference { min_eig: f64, tol: f64 },
    #[error("field element `{0}` has no classification")]
    UnclassifiedElement(String),
    #[error("unknown field system `{0}`")]
    MissingFieldSystem(String),
    #[error("linear system singular at step {step}: {source}")]
    SingularSystemAtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("initial state inconsistent: algebraic residual {residual:e} exceeds {tol:e}")]
    InconsistentInitialState { residual: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
