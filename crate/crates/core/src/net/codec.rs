use serde::Serialize;

use super::DecodeError;
use crate::cauchy::CauchyMatrix;
use crate::protocol::{PartitionQuery, ProtocolParams, RoundAnswer};

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.bytes.len() < n {
            return Err(DecodeError::Truncated {
                needed: n - self.bytes.len(),
            });
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>, DecodeError> {
        let raw = self.take(
            n.checked_mul(4)
                .ok_or(DecodeError::Truncated { needed: usize::MAX })?,
        )?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    fn finish(self) -> Result<(), DecodeError> {
        match self.bytes.len() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

fn put_u16(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(
        &u16::try_from(v)
            .expect("value fits the u16 wire field")
            .to_le_bytes(),
    );
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// `round | block count | (size | sorted indices)*`, all u16 LE.
pub fn encode_query(query: &PartitionQuery) -> Vec<u8> {
    let total: usize = query.blocks.iter().map(|b| 2 + 2 * b.len()).sum();
    let mut out = Vec::with_capacity(4 + total);
    put_u16(&mut out, query.round);
    put_u16(&mut out, query.blocks.len());
    for block in &query.blocks {
        put_u16(&mut out, block.len());
        for &i in block {
            put_u16(&mut out, i);
        }
    }
    out
}

/// Decodes a query over `k` messages. The blocks must partition `1..=k` and
/// each block must be sorted ascending.
pub fn decode_query(bytes: &[u8], k: usize) -> Result<PartitionQuery, DecodeError> {
    let mut r = Reader::new(bytes);
    let round = r.u16()? as usize;
    if round == 0 {
        return Err(DecodeError::Invalid("round 0".into()));
    }
    let count = r.u16()? as usize;
    let mut blocks = Vec::with_capacity(count);
    for _ in 0..count {
        let size = r.u16()? as usize;
        let block = (0..size)
            .map(|_| r.u16().map(usize::from))
            .collect::<Result<Vec<_>, _>>()?;
        if block.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DecodeError::InvalidPartition(format!(
                "block {block:?} is not strictly ascending"
            )));
        }
        blocks.push(block);
    }
    r.finish()?;
    let query = PartitionQuery { round, blocks };
    query
        .check_partition(k)
        .map_err(DecodeError::InvalidPartition)?;
    Ok(query)
}

/// `round | packet count | m` as u16 LE, then every symbol as u32 LE.
pub fn encode_answer(answer: &RoundAnswer) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + 4 * answer.packets.len() * answer.symbols);
    put_u16(&mut out, answer.round);
    put_u16(&mut out, answer.packets.len());
    put_u16(&mut out, answer.symbols);
    for packet in &answer.packets {
        debug_assert_eq!(packet.len(), answer.symbols);
        for &v in packet {
            put_u32(&mut out, v);
        }
    }
    out
}

pub fn decode_answer(bytes: &[u8], q: u32) -> Result<RoundAnswer, DecodeError> {
    let mut r = Reader::new(bytes);
    let round = r.u16()? as usize;
    let count = r.u16()? as usize;
    let symbols = r.u16()? as usize;
    if symbols == 0 {
        return Err(DecodeError::Invalid("packets carry zero symbols".into()));
    }
    let mut packets = Vec::with_capacity(count);
    for _ in 0..count {
        let packet = r.u32s(symbols)?;
        if let Some(&value) = packet.iter().find(|&&v| v >= q) {
            return Err(DecodeError::NonCanonical { value, q });
        }
        packets.push(packet);
    }
    r.finish()?;
    Ok(RoundAnswer {
        round,
        symbols,
        packets,
    })
}

/// Session parameters. The server's HELLO fills every field and carries the
/// Cauchy points; a client may send zeros for "whatever the server has" and
/// omit the points.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Hello {
    pub k: u32,
    pub side_len: u32,
    pub l: u32,
    pub q: u32,
    pub symbols: u32,
    pub x_points: Vec<u32>,
    pub y_points: Vec<u32>,
}

impl Hello {
    pub fn for_session(params: &ProtocolParams, cauchy: &CauchyMatrix) -> Self {
        Self {
            k: params.k() as u32,
            side_len: params.side_len() as u32,
            l: params.l() as u32,
            q: params.q(),
            symbols: params.symbols() as u32,
            x_points: cauchy.x_points().to_vec(),
            y_points: cauchy.y_points().to_vec(),
        }
    }

    /// A client request pinning only the given fields.
    pub fn request(k: u32, side_len: u32, q: u32, symbols: u32) -> Self {
        Self {
            k,
            side_len,
            q,
            symbols,
            ..Self::default()
        }
    }

    pub fn params(&self) -> Result<ProtocolParams, crate::protocol::ProtocolError> {
        let params = ProtocolParams::new(
            self.k as usize,
            self.side_len as usize,
            self.q.into(),
            self.symbols as usize,
        )?;
        if params.l() != self.l as usize {
            return Err(crate::protocol::ProtocolError::InvalidParams(format!(
                "l = {} does not match K and M (expected {})",
                self.l,
                params.l()
            )));
        }
        Ok(params)
    }

    pub fn cauchy(&self) -> Result<CauchyMatrix, crate::protocol::ProtocolError> {
        let params = self.params()?;
        Ok(CauchyMatrix::from_points_for(
            params.field(),
            params.k(),
            params.side_len(),
            params.l(),
            self.x_points.clone(),
            self.y_points.clone(),
        )?)
    }

    /// Checks a client request against the server's parameters. Zero fields
    /// and empty point lists match anything.
    pub fn mismatch(&self, server: &Hello) -> Option<String> {
        let fields = [
            ("K", self.k, server.k),
            ("M", self.side_len, server.side_len),
            ("l", self.l, server.l),
            ("q", self.q, server.q),
            ("m", self.symbols, server.symbols),
        ];
        for (name, ours, theirs) in fields {
            if ours != 0 && ours != theirs {
                return Some(format!("{name} = {ours}, server has {theirs}"));
            }
        }
        if !self.x_points.is_empty() && self.x_points != server.x_points {
            return Some("Cauchy x points differ".into());
        }
        if !self.y_points.is_empty() && self.y_points != server.y_points {
            return Some("Cauchy y points differ".into());
        }
        None
    }
}

pub fn encode_hello(hello: &Hello) -> Vec<u8> {
    let mut out = Vec::with_capacity(28 + 4 * (hello.x_points.len() + hello.y_points.len()));
    for v in [hello.k, hello.side_len, hello.l, hello.q, hello.symbols] {
        put_u32(&mut out, v);
    }
    for points in [&hello.x_points, &hello.y_points] {
        put_u32(&mut out, points.len() as u32);
        for &p in points {
            put_u32(&mut out, p);
        }
    }
    out
}

pub fn decode_hello(bytes: &[u8]) -> Result<Hello, DecodeError> {
    let mut r = Reader::new(bytes);
    let (k, side_len, l, q, symbols) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?);
    let nx = r.u32()? as usize;
    let x_points = r.u32s(nx)?;
    let ny = r.u32()? as usize;
    let y_points = r.u32s(ny)?;
    r.finish()?;
    Ok(Hello {
        k,
        side_len,
        l,
        q,
        symbols,
        x_points,
        y_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[repr(u16)]
pub enum ErrorCode {
    MalformedFrame = 1,
    ProtocolOrder = 2,
    MalformedQuery = 3,
    ParamMismatch = 4,
    Internal = 5,
    RoundsExhausted = 6,
}

impl ErrorCode {
    fn from_u16(v: u16) -> Option<Self> {
        Some(match v {
            1 => Self::MalformedFrame,
            2 => Self::ProtocolOrder,
            3 => Self::MalformedQuery,
            4 => Self::ParamMismatch,
            5 => Self::Internal,
            6 => Self::RoundsExhausted,
            _ => return None,
        })
    }
}

/// `code` (u16 LE) followed by a UTF-8 reason.
pub fn encode_error(code: ErrorCode, message: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 + message.len());
    out.extend_from_slice(&(code as u16).to_le_bytes());
    out.extend_from_slice(message.as_bytes());
    out
}

pub fn decode_error(bytes: &[u8]) -> Result<(ErrorCode, String), DecodeError> {
    let mut r = Reader::new(bytes);
    let raw = r.u16()?;
    let code = ErrorCode::from_u16(raw)
        .ok_or_else(|| DecodeError::Invalid(format!("error code {raw}")))?;
    let message =
        String::from_utf8(r.bytes.to_vec()).map_err(|e| DecodeError::Invalid(e.to_string()))?;
    Ok((code, message))
}
