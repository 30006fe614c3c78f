use thiserror::Error;

use crate::complex::CellId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
    #[error("cell {0} is not a 1-cell")]
    NotAnEdge(CellId),
    #[error("path is not a valid walk: {0}")]
    InvalidPath(String),
    #[error("path is not closed at vertex {0}")]
    OpenPath(CellId),
    #[error("no matrix assigned to edge {0}")]
    MissingEdgeMatrix(CellId),
    #[error("matrix for edge {0} is singular")]
    SingularMatrix(CellId),
    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    RankMismatch { rows: usize, cols: usize, expected: usize },
    #[error("bundle is not flat: {0}")]
    NotFlat(String),
    #[error("invalid spray: {0}")]
    InvalidSpray(String),
    #[error("1-skeleton is disconnected")]
    Disconnected,
    #[error("subdivision supports dimension <= 3, complex has dimension {0}")]
    UnsupportedDimension(usize),
    #[error("cannot subdivide: {0}")]
    Subdivision(String),
    #[error("class does not belong to this complex's first homology: {0}")]
    ClassMismatch(String),
    #[error("integer overflow during Smith normal form")]
    Overflow,
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("ill-conditioned rank decision: eigenvalue {eigenvalue:e} within guard band of cutoff {cutoff:e}")]
    IllConditioned { eigenvalue: f64, cutoff: f64 },
    #[error("holonomy has eigenvalue 1; use the restricted determinant")]
    ZeroMode,
    #[error("non-rational entry where exact arithmetic is required: {0}")]
    NotExact(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
