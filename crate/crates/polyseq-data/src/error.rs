use thiserror::Error;

/// One bad CSV cell; collected per run and fatal unless bad rows are
/// explicitly skipped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("row {line}, column '{column}': {message}")]
pub struct RowError {
    /// 1-based CSV line number (the header is line 1).
    pub line: usize,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("dataset column '{0}' missing from CSV header")]
    MissingColumn(String),
    #[error("{} row error(s); first: {}", .0.len(), .0[0])]
    RowErrors(Vec<RowError>),
    #[error("split produced an empty {0} set")]
    EmptySplit(String),
    #[error("split column value '{0}' is not mapped to train or test")]
    UnmappedSplitValue(String),
    #[error("split plan needs a split column, but the schema declares none")]
    NoSplitColumn,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
