//! Checks a transcript against the scheme's guarantees.
//!
//! - [`posterior`] computes the server's exact posterior on every round's
//!   demand by enumerating all side-information sets and demand sequences
//!   that could have produced the observed partitions.
//! - [`capacity`], [`measured_rate`] and [`rank_profile`] compare download
//!   cost and answer-matrix rank with the per-round capacity and the rank
//!   lower bound.
//!
//! Everything is exact: probabilities are arbitrary-precision rationals.

mod posterior;
mod rates;
mod report;

pub use posterior::{posterior, PosteriorTable};
pub use rates::{capacity, measured_rate, rank_bound, rank_profile, RoundRank};
pub use report::{AuditReport, Check};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("transcript has no rounds")]
    EmptyTranscript,
    #[error("inconsistent transcript: {0}")]
    InconsistentTranscript(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("round {0} is not in the transcript")]
    MissingRound(usize),
    #[error("K = {0} is too large for exhaustive enumeration (limit 128)")]
    TooLarge(usize),
}
