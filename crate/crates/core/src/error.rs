use thiserror::Error;

/// Errors raised by the fusion library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("nonzero diagonal entry {value} at index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("asymmetry {gap} at ({row}, {col}) exceeds tolerance")]
    AsymmetryTooLarge { row: usize, col: usize, gap: f64 },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("window starting at {start} does not fit in a series of length {len}")]
    WindowOutOfRange { start: usize, len: usize },
    #[error("vector dimensions disagree: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("matrix sizes disagree: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("row {row} has no positive off-diagonal similarity")]
    ZeroRowSum { row: usize },
    #[error("nearest-neighbour set of point {row} is empty (kappa * N too small)")]
    EmptyNeighborhood { row: usize },
    #[error("similarity network fusion needs at least two views, got {0}")]
    TooFewViews(usize),
    #[error("projection vector is not unit length (norm {0})")]
    NonUnitProjection(f64),
    #[error("symmetric eigen-solver did not converge")]
    ConvergenceFailure,
    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,
    #[error("input has zero variance")]
    ConstantInput,
    #[error("an explicit finite threshold is required for dimension 2")]
    ThresholdRequired,
    #[error("simplex count {count} exceeds budget {budget}")]
    BudgetExceeded { count: usize, budget: usize },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("too few rows: need {needed}, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("cannot parse {value:?} as a number at row {row}, column {column:?}")]
    UnparseableNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FusionError {
    fn from(e: std::io::Error) -> Self {
        FusionError::Io(e.to_string())
    }
}

impl From<csv::Error> for FusionError {
    fn from(e: csv::Error) -> Self {
        FusionError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FusionError>;
