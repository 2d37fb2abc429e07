use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("function undefined at eigenvalue {0:e}")]
    Domain(f64),
    #[error("layout mismatch: {0} vs {1}")]
    LayoutMismatch(String, String),
    #[error("duplicate subsystem label '{0}'")]
    LabelCollision(String),
    #[error("unknown subsystem label '{0}'")]
    UnknownLabel(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("total dimension {0} exceeds the cap of {cap}", cap = crate::MAX_DIM)]
    TooLarge(usize),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("json: {0}")]
    Json(String),
}

pub type QResult<T> = Result<T, QError>;
