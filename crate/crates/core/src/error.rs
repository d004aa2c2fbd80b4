use thiserror::Error;

/// Errors produced by the collocation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("set of {requested} multi-indices exceeds the cardinality cap of {cap}")]
    CardinalityOverflow { requested: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} lies outside the support of the {family} family")]
    OutsideSupport { family: &'static str, value: f64 },

    #[error("row {row}, coordinate {coordinate}: value {value} lies outside the basis support")]
    RowOutsideSupport {
        row: usize,
        coordinate: usize,
        value: f64,
    },

    #[error("row {row} lies on the boundary of [-1,1]^d, where the weight vanishes")]
    BoundaryPoint { row: usize },

    #[error("density {density} is singular at {value}")]
    SingularDensity { density: &'static str, value: f64 },

    #[error("rank deficient: numerical rank {rank}, required {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("underdetermined system ({rows} rows < {cols} columns); use sparse recovery instead")]
    Underdetermined { rows: usize, cols: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("duplicate points at rows {0} and {1}")]
    DuplicatePoints(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
