use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input file. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no data rows")]
    NoDataRows,

    #[error("no rows survive coverage filter")]
    EmptyAfterFilter,

    #[error("impute before distance computation")]
    MissingCells,

    #[error("fill value {fill} lies outside the {domain} domain")]
    FillOutOfDomain { fill: f64, domain: String },

    #[error("neighbor count {n} out of range 1..={max}")]
    NeighborCountOutOfRange { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("component too small; embedding is the zero vector by convention")]
    ComponentTooSmall,

    #[error("vertex {0} has zero degree inside a connected component")]
    ZeroDegree(usize),

    #[error("empty graph")]
    EmptyGraph,

    #[error("gaussian fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("gaussian fit needs a non-constant series")]
    ConstantSeries,
}
