use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at vertex {vertex}")]
    NonFinite { vertex: usize },
    #[error("n = {0} exceeds the enumeration cap of {max}", max = crate::cube::MAX_N)]
    NTooLarge(usize),
    #[error("coordinate {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: space expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("negative input value {value} at vertex {vertex}")]
    NegativeInput { vertex: usize, value: f64 },
    #[error("exact sign enumeration requested for n = {0} > 20")]
    ExactTooLarge(usize),
    #[error("moment a(p) vanishes (constant function)")]
    ZeroMoment,
    #[error("exponential argument {0} exceeds 700")]
    Overflow(f64),
    #[error("invalid epsilon {0}")]
    InvalidEpsilon(f64),
    #[error("degenerate random draw (zero gradient) after {0} attempts")]
    DegenerateDraw(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("function is not Lipschitz-normalized: sup gradient {sup}")]
    NotLipschitz { sup: f64 },
    #[error("empty exponent grid")]
    EmptyGrid,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("matrix is not positive semidefinite: eigenvalue {0}")]
    NotPsd(f64),
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("exponent {p} outside the admissible range {range}")]
    InvalidRange { p: f64, range: String },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("in check `{check}`: {source}")]
    InCheck {
        check: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_check(self, check: &str) -> Self {
        Error::InCheck {
            check: check.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
