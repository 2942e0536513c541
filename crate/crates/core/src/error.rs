use thiserror::Error;

/// Errors produced by the lattice construction and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("base {0} is not a prime (prime powers are not supported)")]
    NonPrimeBase(u64),
    #[error("polynomial {0} is not irreducible over F_{1}")]
    NotIrreducible(u64, u32),
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("precision n={n} is smaller than m={m}")]
    PrecisionError { n: u32, m: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value {0} outside the domain [0, 1]")]
    DomainError(f64),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("weights not supported here: {0}")]
    UnsupportedWeights(String),
    #[error("q = infinity (p = 1) is only available through the Zaremba index / figure of merit")]
    QInfinityUnsupported,
    #[error("dual search box too small: {0}")]
    BoxTooSmall(String),
    #[error("exhaustive search exceeds the configured bound: {0}")]
    SearchExhausted(String),
    #[error("lambda = {lambda} outside the admissible range [1, {upper})")]
    LambdaOutOfRange { lambda: f64, upper: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("randomization {0} is incompatible with this rule")]
    IncompatibleRandomization(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
