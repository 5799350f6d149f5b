// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("positions must be strictly ascending (position {prev} followed by {next})")]
    Unsorted { prev: usize, next: usize },

    #[error("invalid segment set: {0}")]
    InvalidSegments(String),

    #[error("segment p-values are missing; annotate the result with p-values first")]
    MissingPValues,

    #[error("enumeration of C({n}, {m}) placements exceeds the limit of {limit}; use the Monte Carlo estimator")]
    EnumerationTooLarge { n: usize, m: usize, limit: u64 },

    #[error("invalid signal model: {0}")]
    InvalidModel(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
