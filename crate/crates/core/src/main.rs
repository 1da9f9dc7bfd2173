use std::error::Error;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opir::audit::{capacity, measured_rate, AuditError, AuditReport};
use opir::cauchy::{build_cauchy, default_matrix};
use opir::net::{
    read_database, read_transcript, run_remote_session, write_database, write_transcript, Hello,
    SessionConfig, TcpServer,
};
use opir::protocol::{merge_depth, run_session, Database, ProtocolParams, SessionOutcome};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "opir",
    version,
    about = "Online private information retrieval with side information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run client and server in one process.
    Simulate {
        #[arg(long)]
        k: usize,
        /// Side-information size M.
        #[arg(long)]
        m: usize,
        /// Field modulus. Without it a verified default Cauchy matrix is used.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, env = "OPIR_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        demands: Vec<usize>,
        /// Side-information indices; random when omitted.
        #[arg(long, value_delimiter = ',')]
        side: Option<Vec<usize>>,
        /// Symbols per message.
        #[arg(long, default_value_t = 1)]
        symbols: usize,
        /// Database file; a seeded random database when omitted.
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        transcript_out: Option<PathBuf>,
    },
    /// Serve a database over TCP.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7470")]
        listen: String,
    },
    /// Retrieve messages from a running server.
    Client {
        #[arg(long)]
        connect: String,
        #[arg(long, value_delimiter = ',', required = true)]
        side: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        demands: Vec<usize>,
        #[arg(long, env = "OPIR_SEED", default_value_t = 0)]
        seed: u64,
        /// Database file holding the client's side messages.
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        transcript_out: Option<PathBuf>,
    },
    /// Check a transcript's privacy posterior, rates and ranks.
    Audit {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the per-round capacity table.
    Capacity {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Write a random database file.
    GenDb {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m_symbols: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, env = "OPIR_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Simulate {
            k,
            m,
            q,
            seed,
            demands,
            side,
            symbols,
            db,
            transcript_out,
        } => simulate(k, m, q, seed, &demands, side, symbols, db, transcript_out),
        Command::Serve { config, listen } => {
            let config = SessionConfig::load(&config)?;
            let (params, cauchy, db) = config.resolve()?;
            let server = TcpServer::bind(&listen, params, cauchy, db)?;
            eprintln!(
                "serving K = {}, M = {}, q = {} on {}",
                params.k(),
                params.side_len(),
                params.q(),
                server.local_addr()?
            );
            server.run()?;
            Ok(true)
        }
        Command::Client {
            connect,
            side,
            demands,
            seed,
            db,
            transcript_out,
        } => {
            let db = read_database(&mut BufReader::new(File::open(db)?))?;
            let values = side
                .iter()
                .map(|&i| {
                    db.messages()
                        .get(i.wrapping_sub(1))
                        .cloned()
                        .ok_or_else(|| format!("side index {i} is not in the database"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let request = Hello::request(
                db.len() as u32,
                side.len() as u32,
                db.field().modulus(),
                db.symbols() as u32,
            );
            let outcome =
                run_remote_session(connect.as_str(), &request, &side, values, &demands, seed)?;
            report_session(&outcome, Some(&db), transcript_out)
        }
        Command::Audit { transcript, json } => {
            let t = read_transcript(&mut BufReader::new(File::open(transcript)?))?;
            match AuditReport::build(&t) {
                Ok(report) => {
                    if json {
                        println!("{}", serde_json::to_string_pretty(&report)?);
                    } else {
                        print!("{report}");
                    }
                    Ok(report.passed())
                }
                Err(e @ AuditError::InconsistentTranscript(_)) => {
                    println!("[FAIL] {e}");
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Capacity { k, m } => {
            let l = merge_depth(k, m)
                .ok_or_else(|| format!("K = {k}, M = {m}: K/(M+1) must be a power of two >= 2"))?;
            println!("round  capacity");
            for i in 1..=l + 1 {
                println!("{i:<6} {}", capacity(k, m, i)?);
            }
            Ok(true)
        }
        Command::GenDb {
            k,
            m_symbols,
            q,
            seed,
            out,
        } => {
            let field = opir::field::PrimeField::new(q)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let messages = (0..k)
                .map(|_| {
                    (0..m_symbols)
                        .map(|_| rand::Rng::random_range(&mut rng, 0..field.modulus()))
                        .collect()
                })
                .collect();
            let db = Database::new(field, messages)?;
            write_database(&mut BufWriter::new(File::create(&out)?), &db)?;
            println!(
                "wrote {k} messages of {m_symbols} symbols over F_{q} to {}",
                out.display()
            );
            Ok(true)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    k: usize,
    m: usize,
    q: Option<u64>,
    seed: u64,
    demands: &[usize],
    side: Option<Vec<usize>>,
    symbols: usize,
    db: Option<PathBuf>,
    transcript_out: Option<PathBuf>,
) -> Result<bool> {
    let l = merge_depth(k, m)
        .ok_or_else(|| format!("K = {k}, M = {m}: K/(M+1) must be a power of two >= 2"))?;
    let cauchy = match q {
        Some(q) => Arc::new(build_cauchy(q, k, m, l)?),
        None => default_matrix(k, m, l)?,
    };
    let params = ProtocolParams::new(k, m, cauchy.field().modulus().into(), symbols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let db = match db {
        Some(path) => read_database(&mut BufReader::new(File::open(path)?))?,
        None => Database::random(&params, &mut rng),
    };
    let side = side.unwrap_or_else(|| {
        let mut free: Vec<usize> = (1..=k).filter(|i| !demands.contains(i)).collect();
        free.shuffle(&mut rng);
        free.truncate(m);
        free
    });
    let outcome = run_session(params, cauchy, Arc::new(db.clone()), &side, demands, seed)?;
    println!("K = {k}, M = {m}, q = {}, side = {side:?}", params.q());
    report_session(&outcome, Some(&db), transcript_out)
}

fn report_session(
    outcome: &SessionOutcome,
    db: Option<&Database>,
    transcript_out: Option<PathBuf>,
) -> Result<bool> {
    let t = &outcome.transcript;
    let (k, m) = (t.params.k(), t.params.side_len());
    let mut ok = true;
    println!("round  packets  rate   capacity  recovered");
    for (i, recovered) in outcome.recovered.iter().enumerate() {
        let round = i + 1;
        let rate = measured_rate(t, round)?;
        let cap = capacity(k, m, round)?;
        ok &= rate == cap;
        let shown: Vec<String> = recovered
            .iter()
            .map(|(idx, v)| format!("{idx}={v:?}"))
            .collect();
        println!(
            "{round:<6} {:<8} {:<6} {:<9} {}",
            t.rounds[i].cost(),
            rate,
            cap,
            shown.join(" ")
        );
        if let Some(db) = db {
            for (&idx, v) in recovered {
                if db.messages().get(idx - 1) != Some(v) {
                    eprintln!("message {idx} does not match the database");
                    ok = false;
                }
            }
        }
    }
    if let Some(path) = transcript_out {
        write_transcript(&mut BufWriter::new(File::create(&path)?), t)?;
        println!("transcript written to {}", path.display());
    }
    Ok(ok)
}
