use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-numeric cell {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("dataset shape: {0}")]
    Shape(String),

    #[error("value {value} in column {column} lies outside the unit interval")]
    OutsideUnitCube { column: usize, value: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid scale set: {0}")]
    InvalidScales(String),

    #[error(
        "only {usable} usable scales remain after excluding empty ones; at least 2 are required"
    )]
    TooFewScales { usable: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate target: intrinsic dimension estimate {0} is not positive")]
    DegenerateTarget(f64),

    #[error("degenerate feature {name:?}: intrinsic dimension estimate {id} is not positive")]
    DegenerateFeature { name: String, id: f64 },

    #[error("constant reference values give a zero denominator")]
    ConstantReference,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::NonNumeric { .. }
                | Error::DuplicateColumn(_)
                | Error::UnknownColumn(_)
                | Error::Shape(_)
                | Error::OutsideUnitCube { .. }
                | Error::TooFewPoints { .. }
        )
    }
}
