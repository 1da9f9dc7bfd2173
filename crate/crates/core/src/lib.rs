//! Single-server online private information retrieval with side information.
//!
//! A client that already knows `M` of the server's `K` messages retrieves one
//! new message per round. Each round's demand stays individually private: from
//! the server's point of view every index is equally likely, for every round
//! so far. The online partitioning scheme implemented here downloads
//! `K/(M+1)` packets in round 1 and `KM/(2^(i-1)(M+1))` packets in round `i`.
//!
//! Modules:
//! - [`field`]: prime-field arithmetic and dense linear algebra.
//! - [`cauchy`]: the Cauchy coding matrix and its decodability check.
//! - [`protocol`]: client and server state machines and in-process sessions.
//! - [`audit`]: exact privacy posteriors, rates and answer-matrix ranks.
//! - [`net`]: wire format, transcript and database files, TCP transport.

pub mod audit;
pub mod cauchy;
pub mod field;
pub mod net;
pub mod protocol;
mod util;
