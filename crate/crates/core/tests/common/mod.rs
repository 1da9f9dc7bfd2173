#![allow(dead_code)]

use std::sync::Arc;

use opir::cauchy::{build_cauchy, default_matrix, CauchyMatrix};
use opir::protocol::{
    merge_depth, Client, Database, ProtocolParams, Server, SessionOutcome, SideInformation,
    Transcript, TranscriptRound,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// (K, M) pairs exercised by the grid tests.
pub const GRID: [(usize, usize); 5] = [(4, 1), (8, 1), (8, 3), (12, 2), (16, 3)];

/// Seed that makes the client produce the worked example's partitions.
pub const EXAMPLE_SEED: u64 = 618;
pub const EXAMPLE_SIDE: [usize; 2] = [2, 3];
pub const EXAMPLE_DEMANDS: [usize; 3] = [1, 4, 7];

pub struct Example {
    pub params: ProtocolParams,
    pub cauchy: Arc<CauchyMatrix>,
    pub db: Arc<Database>,
}

/// q = 17, K = 12, M = 2, m = 1, canonical points, X_k = k.
pub fn example() -> Example {
    let params = ProtocolParams::new(12, 2, 17, 1).unwrap();
    let cauchy = Arc::new(build_cauchy(17, 12, 2, 2).unwrap());
    let db = Database::new(params.field(), (1..=12).map(|k| vec![k]).collect()).unwrap();
    Example {
        params,
        cauchy,
        db: Arc::new(db),
    }
}

/// Parameters and verified default matrix for a grid point.
pub fn grid_setup(k: usize, m: usize, symbols: usize) -> (ProtocolParams, Arc<CauchyMatrix>) {
    let l = merge_depth(k, m).unwrap();
    let cauchy = default_matrix(k, m, l).unwrap();
    let params = ProtocolParams::new(k, m, cauchy.field().modulus().into(), symbols).unwrap();
    (params, cauchy)
}

/// Random side information, then `rounds` demands each drawn uniformly from
/// the messages the client does not yet know. The client itself is seeded
/// with `seed`, so `run_session` with the returned side and demands replays
/// the same session.
pub fn random_session(
    params: ProtocolParams,
    cauchy: &Arc<CauchyMatrix>,
    db: &Arc<Database>,
    rounds: usize,
    seed: u64,
) -> (
    Vec<usize>,
    Vec<usize>,
    Result<SessionOutcome, opir::protocol::ProtocolError>,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let mut all: Vec<usize> = (1..=params.k()).collect();
    all.shuffle(&mut rng);
    let side: Vec<usize> = all[..params.side_len()].to_vec();
    let info = SideInformation::from_database(&params, db, &side).unwrap();
    let mut client = Client::new(params, Arc::clone(cauchy), info, seed).unwrap();
    let mut server = Server::new(params, Arc::clone(db), Arc::clone(cauchy)).unwrap();
    let mut transcript = Transcript::new(params, (**cauchy).clone());
    let mut demands = Vec::new();
    let mut recovered = Vec::new();
    for _ in 0..rounds {
        let unknown: Vec<usize> = (1..=params.k())
            .filter(|i| !client.known().contains_key(i))
            .collect();
        let demand = *unknown.choose(&mut rng).unwrap();
        demands.push(demand);
        let step = (|| {
            let query = client.next_query(demand)?;
            let answer = server.answer(query.clone())?;
            recovered.push(client.decode_round(answer.clone())?);
            transcript.rounds.push(TranscriptRound { query, answer });
            Ok(())
        })();
        if let Err(e) = step {
            return (side, demands, Err(e));
        }
    }
    (
        side,
        demands,
        Ok(SessionOutcome {
            transcript,
            recovered,
        }),
    )
}

pub fn random_db(params: &ProtocolParams, seed: u64) -> Arc<Database> {
    Arc::new(Database::random(
        params,
        &mut ChaCha8Rng::seed_from_u64(seed),
    ))
}
