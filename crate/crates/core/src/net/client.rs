use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::Arc;

use super::codec::{decode_answer, decode_error, decode_hello, encode_hello, encode_query, Hello};
use super::wire::{read_frame, write_frame, Frame, FrameType};
use super::NetError;
use crate::cauchy::CauchyMatrix;
use crate::protocol::{
    Client, PartitionQuery, ProtocolParams, RoundAnswer, SessionOutcome, SideInformation,
    Transcript, TranscriptRound,
};

/// A connected session after a successful HELLO exchange.
#[derive(Debug)]
pub struct RemoteSession {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    hello: Hello,
    params: ProtocolParams,
    cauchy: Arc<CauchyMatrix>,
}

impl RemoteSession {
    pub fn connect<A: ToSocketAddrs>(addr: A, request: &Hello) -> Result<Self, NetError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut session = RawSession {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        };
        session.send(FrameType::Hello, &encode_hello(request))?;
        let hello = decode_hello(&session.expect(FrameType::Hello)?)?;
        let params = hello.params()?;
        let cauchy = Arc::new(hello.cauchy()?);
        Ok(Self {
            reader: session.reader,
            writer: session.writer,
            hello,
            params,
            cauchy,
        })
    }

    /// The server's HELLO.
    pub fn hello(&self) -> &Hello {
        &self.hello
    }

    pub fn params(&self) -> ProtocolParams {
        self.params
    }

    pub fn cauchy(&self) -> &Arc<CauchyMatrix> {
        &self.cauchy
    }

    pub fn send_frame(&mut self, kind: FrameType, payload: &[u8]) -> Result<(), NetError> {
        write_frame(&mut self.writer, kind, payload)?;
        Ok(())
    }

    pub fn recv_frame(&mut self) -> Result<Frame, NetError> {
        read_frame(&mut self.reader)?.ok_or(NetError::Closed)
    }

    /// Sends `query` and waits for the answer. An ERROR frame from the
    /// server becomes [`NetError::Remote`].
    pub fn exchange(&mut self, query: &PartitionQuery) -> Result<RoundAnswer, NetError> {
        self.send_frame(FrameType::Query, &encode_query(query))?;
        let payload = expect(self.recv_frame()?, FrameType::Answer)?;
        Ok(decode_answer(&payload, self.params.q())?)
    }

    pub fn close(mut self) -> Result<(), NetError> {
        self.send_frame(FrameType::Bye, &[])?;
        self.writer.flush()?;
        Ok(())
    }
}

struct RawSession {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl RawSession {
    fn send(&mut self, kind: FrameType, payload: &[u8]) -> Result<(), NetError> {
        write_frame(&mut self.writer, kind, payload)?;
        Ok(())
    }

    fn expect(&mut self, kind: FrameType) -> Result<Vec<u8>, NetError> {
        expect(read_frame(&mut self.reader)?.ok_or(NetError::Closed)?, kind)
    }
}

fn expect(frame: Frame, kind: FrameType) -> Result<Vec<u8>, NetError> {
    if frame.kind == FrameType::Error {
        let (code, message) = decode_error(&frame.payload)?;
        return Err(NetError::Remote { code, message });
    }
    if frame.kind != kind {
        return Err(NetError::UnexpectedFrame {
            expected: kind,
            actual: frame.kind,
        });
    }
    Ok(frame.payload)
}

/// Runs a full session against a remote server. `side_values` are the
/// client's copies of the messages at `side`.
pub fn run_remote_session<A: ToSocketAddrs>(
    addr: A,
    request: &Hello,
    side: &[usize],
    side_values: Vec<Vec<u32>>,
    demands: &[usize],
    seed: u64,
) -> Result<SessionOutcome, NetError> {
    let mut session = RemoteSession::connect(addr, request)?;
    let params = session.params();
    let cauchy = Arc::clone(session.cauchy());
    let side = SideInformation::new(&params, side.to_vec(), side_values)?;
    let mut client = Client::new(params, Arc::clone(&cauchy), side, seed)?;
    let mut transcript = Transcript::new(params, (*cauchy).clone());
    let mut recovered = Vec::with_capacity(demands.len());
    for &demand in demands {
        let query = client.next_query(demand)?;
        let answer = session.exchange(&query)?;
        recovered.push(client.decode_round(answer.clone())?);
        transcript.rounds.push(TranscriptRound { query, answer });
    }
    session.close()?;
    Ok(SessionOutcome {
        transcript,
        recovered,
    })
}
