use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    Client, Database, PartitionQuery, ProtocolError, ProtocolParams, RoundAnswer, Server,
    SideInformation,
};
use crate::cauchy::CauchyMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRound {
    pub query: PartitionQuery,
    pub answer: RoundAnswer,
}

impl TranscriptRound {
    /// Download cost in packets.
    pub fn cost(&self) -> usize {
        self.answer.packet_count()
    }
}

/// Everything that crossed the wire in one session: the parameters and
/// Cauchy matrix announced by the server, then each round's query and answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub params: ProtocolParams,
    pub cauchy: CauchyMatrix,
    pub rounds: Vec<TranscriptRound>,
}

impl Transcript {
    pub fn new(params: ProtocolParams, cauchy: CauchyMatrix) -> Self {
        Self {
            params,
            cauchy,
            rounds: Vec::new(),
        }
    }

    pub fn costs(&self) -> Vec<usize> {
        self.rounds.iter().map(TranscriptRound::cost).collect()
    }

    /// Round `round` (1-based), if present.
    pub fn round(&self, round: usize) -> Option<&TranscriptRound> {
        round.checked_sub(1).and_then(|i| self.rounds.get(i))
    }

    /// Checks round numbering and the structure of every query.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let mut prev: Option<&PartitionQuery> = None;
        for (i, r) in self.rounds.iter().enumerate() {
            if r.query.round != i + 1 || r.answer.round != i + 1 {
                return Err(ProtocolError::ProtocolOrder(format!(
                    "transcript entry {} is labelled round {}/{}",
                    i + 1,
                    r.query.round,
                    r.answer.round
                )));
            }
            r.query.validate(&self.params, prev)?;
            if r.answer.packet_count() != self.params.packet_count(i + 1) {
                return Err(ProtocolError::AnswerMismatch(format!(
                    "round {} carries {} packets",
                    i + 1,
                    r.answer.packet_count()
                )));
            }
            prev = Some(&r.query);
        }
        Ok(())
    }
}

/// Result of an in-process session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub transcript: Transcript,
    /// Messages recovered at each round, keyed by index.
    pub recovered: Vec<BTreeMap<usize, Vec<u32>>>,
}

impl SessionOutcome {
    pub fn costs(&self) -> Vec<usize> {
        self.transcript.costs()
    }
}

/// Runs client and server in-process for the given demand sequence.
pub fn run_session(
    params: ProtocolParams,
    cauchy: Arc<CauchyMatrix>,
    database: Arc<Database>,
    side: &[usize],
    demands: &[usize],
    seed: u64,
) -> Result<SessionOutcome, ProtocolError> {
    let side = SideInformation::from_database(&params, &database, side)?;
    let mut server = Server::new(params, database, Arc::clone(&cauchy))?;
    let mut client = Client::new(params, Arc::clone(&cauchy), side, seed)?;
    let mut transcript = Transcript::new(params, (*cauchy).clone());
    let mut recovered = Vec::with_capacity(demands.len());
    for &demand in demands {
        let query = client.next_query(demand)?;
        let answer = server.answer(query.clone())?;
        recovered.push(client.decode_round(answer.clone())?);
        transcript.rounds.push(TranscriptRound { query, answer });
    }
    Ok(SessionOutcome {
        transcript,
        recovered,
    })
}
