use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("matrix dimension {0} is below the supported minimum")]
    DimensionTooSmall(usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("diagonal entry {0} is odd")]
    OddDiagonal(usize),
    #[error("matrix is not positive definite: leading minor of size {0} is not positive")]
    NotPositiveDefinite(usize),
    #[error("form is not primitive (coefficient content {0})")]
    NotPrimitive(String),
    #[error("node budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("gcd({h}, {m}) > 1: closed-form Gauss sum not applicable")]
    NotCoprime { h: i64, m: u64 },
    #[error("p-adic elimination met a pivot of valuation {valuation} >= precision {precision} at p = {p}")]
    PrecisionTooLow { p: u64, valuation: u32, precision: u32 },
    #[error("local density at p = {p} did not stabilize at levels {levels:?}")]
    StabilizationFailure { p: u64, levels: Vec<u32> },
    #[error("prime cutoff {cutoff} misses prime factor {prime} of 2nD")]
    CutoffTooSmall { cutoff: u64, prime: u64 },
    #[error("point is not on the sphere of radius squared {n}")]
    PointNotOnSphere { n: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("family generation exhausted after {0} rejections")]
    GenerationExhausted(u64),
    #[error("malformed form description: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
