use std::io::{self, Read, Write};

use super::{DecodeError, NetError};

pub const MAGIC: [u8; 4] = *b"OPIR";
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 10;
/// Largest payload accepted from a peer.
pub const MAX_PAYLOAD: u32 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameType {
    Query = 0x01,
    Answer = 0x02,
    Hello = 0x03,
    Error = 0x04,
    Bye = 0x05,
}

impl TryFrom<u8> for FrameType {
    type Error = DecodeError;

    fn try_from(b: u8) -> Result<Self, DecodeError> {
        Ok(match b {
            0x01 => Self::Query,
            0x02 => Self::Answer,
            0x03 => Self::Hello,
            0x04 => Self::Error,
            0x05 => Self::Bye,
            other => return Err(DecodeError::UnknownFrameType(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameType, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses one frame from the front of `bytes`, returning it and the rest.
    pub fn parse(bytes: &[u8]) -> Result<(Self, &[u8]), DecodeError> {
        if bytes.len() < HEADER_LEN {
            return Err(DecodeError::Truncated {
                needed: HEADER_LEN - bytes.len(),
            });
        }
        let (kind, len) = parse_header(bytes[..HEADER_LEN].try_into().expect("header length"))?;
        let rest = &bytes[HEADER_LEN..];
        let len = len as usize;
        if rest.len() < len {
            return Err(DecodeError::Truncated {
                needed: len - rest.len(),
            });
        }
        Ok((Self::new(kind, rest[..len].to_vec()), &rest[len..]))
    }
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Result<(FrameType, u32), DecodeError> {
    let magic: [u8; 4] = h[..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(DecodeError::BadMagic(magic));
    }
    if h[4] != VERSION {
        return Err(DecodeError::BadVersion(h[4]));
    }
    let kind = FrameType::try_from(h[5])?;
    let len = u32::from_le_bytes(h[6..10].try_into().expect("4 bytes"));
    if len > MAX_PAYLOAD {
        return Err(DecodeError::Oversized(len));
    }
    Ok((kind, len))
}

pub fn write_frame<W: Write>(w: &mut W, kind: FrameType, payload: &[u8]) -> io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4] = VERSION;
    header[5] = kind as u8;
    header[6..].copy_from_slice(&(payload.len() as u32).to_le_bytes());
    w.write_all(&header)?;
    w.write_all(payload)?;
    w.flush()
}

/// Reads one frame. Returns `Ok(None)` on a clean end of stream before the
/// first header byte.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Frame>, NetError> {
    let mut header = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        match r.read(&mut header[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => {
                return Err(DecodeError::Truncated {
                    needed: HEADER_LEN - filled,
                }
                .into())
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let (kind, len) = parse_header(&header)?;
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => NetError::Decode(DecodeError::Truncated {
            needed: len as usize,
        }),
        _ => e.into(),
    })?;
    Ok(Some(Frame::new(kind, payload)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let bytes = Frame::new(FrameType::Answer, vec![9, 8, 7]).to_bytes();
        assert_eq!(bytes, [b'O', b'P', b'I', b'R', 1, 2, 3, 0, 0, 0, 9, 8, 7]);
        let mut buf = Vec::new();
        write_frame(&mut buf, FrameType::Answer, &[9, 8, 7]).unwrap();
        assert_eq!(buf, bytes);
    }

    #[test]
    fn concatenated_frames_split_cleanly() {
        let a = Frame::new(FrameType::Query, vec![1, 2]);
        let b = Frame::new(FrameType::Bye, vec![]);
        let mut bytes = a.to_bytes();
        bytes.extend(b.to_bytes());
        let (x, rest) = Frame::parse(&bytes).unwrap();
        let (y, rest) = Frame::parse(rest).unwrap();
        assert_eq!((x, y), (a.clone(), b.clone()));
        assert!(rest.is_empty());

        let mut r = bytes.as_slice();
        assert_eq!(read_frame(&mut r).unwrap(), Some(a));
        assert_eq!(read_frame(&mut r).unwrap(), Some(b));
        assert_eq!(read_frame(&mut r).unwrap(), None);
    }

    #[test]
    fn rejects_bad_headers() {
        let good = Frame::new(FrameType::Hello, vec![0; 4]).to_bytes();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(Frame::parse(&bad), Err(DecodeError::BadMagic(_))));
        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(Frame::parse(&bad), Err(DecodeError::BadVersion(2)));
        let mut bad = good.clone();
        bad[5] = 0x09;
        assert_eq!(Frame::parse(&bad), Err(DecodeError::UnknownFrameType(9)));
        assert_eq!(
            Frame::parse(&good[..12]),
            Err(DecodeError::Truncated { needed: 2 })
        );
        let mut r = &good[..12];
        assert!(matches!(read_frame(&mut r), Err(NetError::Decode(_))));
    }
}
