use thiserror::Error;

/// Errors produced by code construction, encoding, decoding and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolarError {
    #[error("block length {0} is not a power of two >= 2")]
    InvalidBlockLength(usize),

    #[error("k = {k} exceeds block length N = {n}")]
    InvalidDimension { k: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("frozen position {0} carries a nonzero bit")]
    NonzeroFrozenBit(usize),

    #[error("design erasure probability {0} is outside (0, 1)")]
    InvalidErasureProbability(f64),

    #[error("row index {index} out of range for n = {stages}")]
    RowOutOfRange { index: usize, stages: usize },

    #[error("infeasible RM-polar construction: only {max_k} rows survive the weight threshold, k = {k} requested")]
    InfeasibleRmPolar { k: usize, max_k: usize },

    #[error("invalid information set: {0}")]
    InvalidInfoSet(String),

    #[error("invalid stage permutation: {0}")]
    InvalidPermutation(String),

    #[error("list size {list} exceeds the {available} distinct stage permutations")]
    ListTooLarge { list: usize, available: u128 },

    #[error("invalid CRC configuration: {0}")]
    InvalidCrc(String),

    #[error("word of {len} bits is shorter than the {width}-bit CRC")]
    CrcTooShort { len: usize, width: usize },

    #[error("operation requires a CRC but the code has none")]
    MissingCrc,

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("k = {0} is too large for brute-force enumeration (max 20)")]
    EnumerationTooLarge(usize),

    #[error("code rate must be positive")]
    ZeroRate,

    #[error("invalid bit string: {0}")]
    InvalidBits(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, PolarError>;
