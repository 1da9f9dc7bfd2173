use std::io::{Read, Write};

use super::codec::{
    decode_answer, decode_hello, decode_query, encode_answer, encode_hello, encode_query, Hello,
};
use super::wire::{read_frame, write_frame, Frame, FrameType};
use super::{DecodeError, NetError};
use crate::field::PrimeField;
use crate::protocol::{Database, ProtocolParams, Transcript, TranscriptRound};

/// HELLO (server parameters and Cauchy points), then a QUERY and ANSWER
/// frame per round.
pub fn write_transcript<W: Write>(w: &mut W, transcript: &Transcript) -> std::io::Result<()> {
    let hello = Hello::for_session(&transcript.params, &transcript.cauchy);
    write_frame(w, FrameType::Hello, &encode_hello(&hello))?;
    for r in &transcript.rounds {
        write_frame(w, FrameType::Query, &encode_query(&r.query))?;
        write_frame(w, FrameType::Answer, &encode_answer(&r.answer))?;
    }
    Ok(())
}

pub fn transcript_to_bytes(transcript: &Transcript) -> Vec<u8> {
    let mut out = Vec::new();
    write_transcript(&mut out, transcript).expect("writing to a Vec cannot fail");
    out
}

fn expect(frame: Option<Frame>, kind: FrameType) -> Result<Vec<u8>, NetError> {
    let frame = frame.ok_or(DecodeError::Truncated { needed: 1 })?;
    if frame.kind != kind {
        return Err(NetError::UnexpectedFrame {
            expected: kind,
            actual: frame.kind,
        });
    }
    Ok(frame.payload)
}

pub fn read_transcript<R: Read>(r: &mut R) -> Result<Transcript, NetError> {
    let hello = decode_hello(&expect(read_frame(r)?, FrameType::Hello)?)?;
    let params = hello.params()?;
    let mut transcript = Transcript::new(params, hello.cauchy()?);
    while let Some(frame) = read_frame(r)? {
        let query = decode_query(&expect(Some(frame), FrameType::Query)?, params.k())?;
        let answer = decode_answer(&expect(read_frame(r)?, FrameType::Answer)?, params.q())?;
        transcript.rounds.push(TranscriptRound { query, answer });
    }
    Ok(transcript)
}

pub fn transcript_from_bytes(mut bytes: &[u8]) -> Result<Transcript, NetError> {
    read_transcript(&mut bytes)
}

/// `K | m | q` as u32 LE, then `K*m` u32 LE elements.
pub fn write_database<W: Write>(w: &mut W, db: &Database) -> std::io::Result<()> {
    let mut out = Vec::with_capacity(12 + 4 * db.len() * db.symbols());
    for v in [db.len() as u32, db.symbols() as u32, db.field().modulus()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in db.messages().iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&out)?;
    w.flush()
}

pub fn read_database<R: Read>(r: &mut R) -> Result<Database, NetError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let word = |i: usize| -> Result<u32, DecodeError> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .ok_or_else(|| DecodeError::Truncated {
                needed: (4 * i + 4).saturating_sub(bytes.len()),
            })
    };
    let (k, m, q) = (word(0)? as usize, word(1)? as usize, word(2)?);
    let field = PrimeField::new(q.into()).map_err(|e| DecodeError::Invalid(e.to_string()))?;
    let expected = k
        .checked_mul(m)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| DecodeError::Invalid(format!("K = {k}, m = {m} is too large")))?;
    if bytes.len() < expected {
        return Err(DecodeError::Truncated {
            needed: expected - bytes.len(),
        }
        .into());
    }
    if bytes.len() > expected {
        return Err(DecodeError::TrailingBytes(bytes.len() - expected).into());
    }
    let mut messages = Vec::with_capacity(k);
    for i in 0..k {
        let msg = (0..m)
            .map(|j| word(3 + i * m + j))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(&value) = msg.iter().find(|&&v| v >= q) {
            return Err(DecodeError::NonCanonical { value, q }.into());
        }
        messages.push(msg);
    }
    Ok(Database::new(field, messages)?)
}

/// Checks that `db` fits `params`, with a config-flavoured error.
pub(crate) fn check_database(db: &Database, params: &ProtocolParams) -> Result<(), NetError> {
    db.check_matches(params)
        .map_err(|e| NetError::Config(e.to_string()))
}
