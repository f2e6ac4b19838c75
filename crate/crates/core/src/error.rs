use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |m - m*| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max |W*W - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("rank {rank} is below the required {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("not a frame: {0}")]
    NotAFrame(String),
    #[error("dual identity violated on the grid (max error {max_error:e}); refine the grid")]
    IdentityViolated { max_error: f64 },
    #[error("sample window is empty")]
    EmptyWindow,
    #[error("operation requires the square case (s = r and s' = rbar): {0}")]
    NotSquareCase(String),
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    #[error("factor {factor} is not a frame: {condition}")]
    FactorNotAFrame { factor: usize, condition: String },
}
