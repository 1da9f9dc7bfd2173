//! Wire format, file formats and TCP transport.
//!
//! Every frame is `"OPIR" | version 0x01 | type | u32 LE payload length |
//! payload`. A session is one HELLO exchange followed by QUERY/ANSWER pairs
//! and an optional BYE. Transcript files store the server's HELLO followed
//! by every QUERY and ANSWER frame, so the auditor reads exactly the bytes a
//! server saw.

mod client;
mod codec;
mod config;
mod files;
mod server;
mod wire;

pub use client::{run_remote_session, RemoteSession};
pub use codec::{
    decode_answer, decode_error, decode_hello, decode_query, encode_answer, encode_error,
    encode_hello, encode_query, ErrorCode, Hello,
};
pub use config::{CauchyPoints, SessionConfig};
pub use files::{
    read_database, read_transcript, transcript_from_bytes, transcript_to_bytes, write_database,
    write_transcript,
};
pub use server::{ServerHandle, TcpServer};
pub use wire::{read_frame, write_frame, Frame, FrameType, MAGIC, MAX_PAYLOAD, VERSION};

use std::io;

use thiserror::Error;

use crate::cauchy::CauchyError;
use crate::protocol::ProtocolError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown frame type {0:#04x}")]
    UnknownFrameType(u8),
    #[error("payload of {0} bytes exceeds the frame limit")]
    Oversized(u32),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("element {value} is not below q = {q}")]
    NonCanonical { value: u32, q: u32 },
    #[error("not a partition: {0}")]
    InvalidPartition(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("decode error: {0}")]
    Decode(#[from] DecodeError),
    #[error("expected a {expected:?} frame, got {actual:?}")]
    UnexpectedFrame {
        expected: FrameType,
        actual: FrameType,
    },
    #[error("connection closed")]
    Closed,
    #[error("peer reported {code:?}: {message}")]
    Remote { code: ErrorCode, message: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error("config: {0}")]
    Config(String),
}
