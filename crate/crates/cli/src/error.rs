use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const UNREADABLE: i32 = 10;
    pub const RAGGED: i32 = 11;
    pub const NON_NUMERIC: i32 = 12;
    pub const EMPTY: i32 = 13;
    pub const NUMERICAL: i32 = 20;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("row {row}: expected {expected} columns, found {got}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column {column}: {cell:?} is not a finite number")]
    NonNumeric {
        row: usize,
        column: usize,
        cell: String,
    },
    #[error("no data rows in {0}")]
    Empty(String),
    #[error("{0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unreadable { .. } => exit::UNREADABLE,
            CliError::Ragged { .. } => exit::RAGGED,
            CliError::NonNumeric { .. } => exit::NON_NUMERIC,
            CliError::Empty(_) => exit::EMPTY,
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

impl From<malpha::Error> for CliError {
    fn from(e: malpha::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
