use std::io::{self, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use super::codec::{
    decode_hello, decode_query, encode_answer, encode_error, encode_hello, ErrorCode, Hello,
};
use super::wire::{read_frame, write_frame, FrameType};
use super::NetError;
use crate::cauchy::CauchyMatrix;
use crate::protocol::{Database, ProtocolError, ProtocolParams, Server};

#[derive(Debug)]
struct Shared {
    params: ProtocolParams,
    cauchy: Arc<CauchyMatrix>,
    database: Arc<Database>,
    hello: Hello,
}

/// TCP front end. Each connection runs one session on its own thread; the
/// database and Cauchy matrix are shared read-only.
#[derive(Debug)]
pub struct TcpServer {
    listener: TcpListener,
    shared: Arc<Shared>,
}

/// A server running on a background thread.
#[derive(Debug)]
pub struct ServerHandle {
    pub local_addr: SocketAddr,
    pub thread: JoinHandle<io::Result<()>>,
}

impl TcpServer {
    pub fn bind<A: ToSocketAddrs>(
        addr: A,
        params: ProtocolParams,
        cauchy: Arc<CauchyMatrix>,
        database: Arc<Database>,
    ) -> Result<Self, NetError> {
        // Fail at startup rather than per connection.
        Server::new(params, Arc::clone(&database), Arc::clone(&cauchy))?;
        let listener = TcpListener::bind(addr)?;
        let hello = Hello::for_session(&params, &cauchy);
        Ok(Self {
            listener,
            shared: Arc::new(Shared {
                params,
                cauchy,
                database,
                hello,
            }),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let shared = Arc::clone(&self.shared);
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = handle(stream, &shared) {
                    eprintln!("session {peer:?}: {e}");
                }
            });
        }
        Ok(())
    }

    pub fn spawn(self) -> io::Result<ServerHandle> {
        let local_addr = self.local_addr()?;
        let thread = thread::spawn(move || self.run());
        Ok(ServerHandle { local_addr, thread })
    }
}

fn send_error<W: Write>(w: &mut W, code: ErrorCode, message: &str) -> Result<(), NetError> {
    write_frame(w, FrameType::Error, &encode_error(code, message))?;
    Ok(())
}

fn error_code(e: &ProtocolError) -> ErrorCode {
    match e {
        ProtocolError::ProtocolOrder(_) => ErrorCode::ProtocolOrder,
        ProtocolError::RoundsExhausted { .. } => ErrorCode::RoundsExhausted,
        ProtocolError::MalformedQuery(_) => ErrorCode::MalformedQuery,
        _ => ErrorCode::Internal,
    }
}

fn handle(stream: TcpStream, shared: &Shared) -> Result<(), NetError> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);

    let Some(first) = read_frame(&mut reader)? else {
        return Ok(());
    };
    if first.kind != FrameType::Hello {
        return send_error(
            &mut writer,
            ErrorCode::ProtocolOrder,
            "session must start with HELLO",
        );
    }
    let request = match decode_hello(&first.payload) {
        Ok(h) => h,
        Err(e) => return send_error(&mut writer, ErrorCode::MalformedFrame, &e.to_string()),
    };
    if let Some(reason) = request.mismatch(&shared.hello) {
        return send_error(&mut writer, ErrorCode::ParamMismatch, &reason);
    }
    write_frame(&mut writer, FrameType::Hello, &encode_hello(&shared.hello))?;

    let mut server = Server::new(
        shared.params,
        Arc::clone(&shared.database),
        Arc::clone(&shared.cauchy),
    )?;
    loop {
        let frame = match read_frame(&mut reader) {
            Ok(Some(f)) => f,
            Ok(None) => return Ok(()),
            Err(NetError::Decode(e)) => {
                return send_error(&mut writer, ErrorCode::MalformedFrame, &e.to_string())
            }
            Err(e) => return Err(e),
        };
        match frame.kind {
            FrameType::Bye => return Ok(()),
            FrameType::Query => {
                let query = match decode_query(&frame.payload, shared.params.k()) {
                    Ok(q) => q,
                    Err(e) => {
                        return send_error(&mut writer, ErrorCode::MalformedQuery, &e.to_string())
                    }
                };
                match server.answer(query) {
                    Ok(answer) => {
                        write_frame(&mut writer, FrameType::Answer, &encode_answer(&answer))?
                    }
                    Err(e) => return send_error(&mut writer, error_code(&e), &e.to_string()),
                }
            }
            other => {
                return send_error(
                    &mut writer,
                    ErrorCode::ProtocolOrder,
                    &format!("unexpected {other:?} frame"),
                )
            }
        }
    }
}
