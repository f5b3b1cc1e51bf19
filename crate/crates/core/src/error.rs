// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word width {0} outside supported range 4..=24")]
    InvalidWidth(u32),
    #[error("value {value} not representable in {width} bits")]
    ValueOutOfRange { value: i64, width: u32 },
    #[error("width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: u32, actual: u32 },
    #[error("invalid saturation bound ({lower}, {upper}): require lower <= 0 <= upper")]
    InvalidBound { lower: i64, upper: i64 },
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("sequence length {len} outside [2, {max}] for width {width}")]
    InvalidSequenceLength { len: u64, max: u64, width: u32 },
    #[error("alpha {alpha} outside [0, {max}]")]
    AlphaOutOfRange { alpha: i64, max: i64 },
    #[error("scaling level {c} outside [0, {max}]")]
    ScaleOutOfRange { c: i64, max: i64 },
    #[error("scaling level is required in gated mode")]
    MissingScale,
    #[error("scaling level is only accepted in gated mode")]
    UnexpectedScale,
    #[error("operation requires {expected} mode")]
    UnsupportedMode { expected: &'static str },
    #[error("{block} has no cost model at width {width}")]
    UnsupportedWidth { block: &'static str, width: u32 },
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("golden case {id}: {reason}")]
    GoldenSchema { id: String, reason: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
