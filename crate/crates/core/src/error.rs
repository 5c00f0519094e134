use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("height {height} exceeds the supported maximum of {max}")]
    HeightCap { height: u32, max: u32 },

    #[error("height {height} is too large for exact enumeration (limit {max})")]
    EnumerationGuard { height: u32, max: u32 },

    #[error("level count k = {k} is outside the supported range {min}..={max}")]
    LevelRange { k: u32, min: u32, max: u32 },

    #[error("input is not hard")]
    NotHard,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("leaf {leaf} is outside 1..={max}")]
    LeafOutOfRange { leaf: u64, max: u64 },

    #[error("leaf {0} is queried twice on one path")]
    RepeatedQuery(u64),

    #[error("{child} is not a child of {parent}")]
    NotAChild { parent: String, child: String },

    #[error("configuration is inconsistent with every 0-hard input")]
    Inconsistent,

    #[error("index {index} out of range (valid: {min}..={max})")]
    OutOfRange { index: usize, min: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
