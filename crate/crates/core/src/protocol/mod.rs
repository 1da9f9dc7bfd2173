//! The online partitioning protocol.
//!
//! Round 1 partitions the `K` messages into `K/(M+1)` blocks of size `M+1`,
//! one of which is `{W_1} ∪ S`; the server returns one column-1 coded packet
//! per block. Every later round merges blocks pairwise: the block holding the
//! new demand is merged with the block holding `S`, the rest are paired at
//! random, and the server returns `M` packets per merged block using that
//! round's Cauchy columns. The client always knows the whole block holding
//! `S`, so each round it solves for the entire block holding the demand.

mod client;
mod params;
mod server;
mod session;
mod types;

pub use client::Client;
pub use params::{merge_depth, ProtocolParams};
pub use server::Server;
pub use session::{run_session, SessionOutcome, Transcript, TranscriptRound};
pub use types::{query_coefficients, Database, PartitionQuery, RoundAnswer, SideInformation};

use thiserror::Error;

use crate::cauchy::CauchyError;
use crate::field::FieldError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid side information: {0}")]
    InvalidSideInformation(String),
    #[error("message {index} is already known to the client")]
    DemandKnown { index: usize },
    #[error("demand {index} is outside 1..={k}")]
    DemandOutOfRange { index: usize, k: usize },
    #[error("protocol order violated: {0}")]
    ProtocolOrder(String),
    #[error("round {round} exceeds the last round {max}")]
    RoundsExhausted { round: usize, max: usize },
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("round-{round} decode system is singular")]
    SingularSystem { round: usize },
    #[error("answer does not match the outstanding query: {0}")]
    AnswerMismatch(String),
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
