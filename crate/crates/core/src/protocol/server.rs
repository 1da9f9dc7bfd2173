use std::sync::Arc;

use super::{Database, PartitionQuery, ProtocolError, ProtocolParams, RoundAnswer};
use crate::cauchy::{column_count, round_column_range, CauchyMatrix};

/// Server half of the protocol: one session's view.
///
/// The server only ever sees partitions. It has no notion of the client's
/// side information or demands.
#[derive(Debug, Clone)]
pub struct Server {
    params: ProtocolParams,
    database: Arc<Database>,
    cauchy: Arc<CauchyMatrix>,
    queries: Vec<PartitionQuery>,
}

impl Server {
    pub fn new(
        params: ProtocolParams,
        database: Arc<Database>,
        cauchy: Arc<CauchyMatrix>,
    ) -> Result<Self, ProtocolError> {
        database.check_matches(&params)?;
        if cauchy.rows() != params.k()
            || cauchy.cols() < column_count(params.side_len(), params.l())
            || cauchy.field() != params.field()
        {
            return Err(ProtocolError::InvalidParams(format!(
                "Cauchy matrix is {}x{} over {}, parameters need {}x{} over {}",
                cauchy.rows(),
                cauchy.cols(),
                cauchy.field(),
                params.k(),
                column_count(params.side_len(), params.l()),
                params.field()
            )));
        }
        Ok(Self {
            params,
            database,
            cauchy,
            queries: Vec::new(),
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn answered_rounds(&self) -> usize {
        self.queries.len()
    }

    /// Validates `query` and returns its coded packets.
    pub fn answer(&mut self, query: PartitionQuery) -> Result<RoundAnswer, ProtocolError> {
        let expected = self.queries.len() + 1;
        if query.round != expected {
            if query.round > self.params.max_rounds() {
                return Err(ProtocolError::RoundsExhausted {
                    round: query.round,
                    max: self.params.max_rounds(),
                });
            }
            return Err(ProtocolError::ProtocolOrder(format!(
                "expected a round-{expected} query, got round {}",
                query.round
            )));
        }
        query.validate(&self.params, self.queries.last())?;
        let answer = self.encode(&query);
        self.queries.push(query);
        Ok(answer)
    }

    fn encode(&self, query: &PartitionQuery) -> RoundAnswer {
        let f = self.params.field();
        let m = self.params.symbols();
        let columns = round_column_range(query.round, self.params.side_len());
        let mut packets = Vec::with_capacity(query.blocks.len() * columns.len());
        for block in &query.blocks {
            for col in columns.clone() {
                let mut acc = vec![0u32; m];
                for &i in block {
                    f.axpy(
                        &mut acc,
                        self.cauchy.coefficient(i, col),
                        self.database.message(i),
                    );
                }
                packets.push(acc);
            }
        }
        RoundAnswer {
            round: query.round,
            symbols: m,
            packets,
        }
    }
}
