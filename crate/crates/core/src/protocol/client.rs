use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PartitionQuery, ProtocolError, ProtocolParams, RoundAnswer, SideInformation};
use crate::cauchy::{round_column_range, CauchyMatrix};
use crate::field::{FieldError, FieldMatrix};

#[derive(Debug, Clone)]
struct Pending {
    query: PartitionQuery,
    demand: usize,
}

/// Client half of the protocol.
///
/// Holds the side information, the full query/answer history and every
/// message recovered so far. All randomness comes from one seeded ChaCha
/// stream, so a seed fixes the whole sequence of queries.
#[derive(Debug, Clone)]
pub struct Client {
    params: ProtocolParams,
    cauchy: Arc<CauchyMatrix>,
    side: SideInformation,
    rng: ChaCha8Rng,
    history: Vec<(PartitionQuery, RoundAnswer)>,
    known: BTreeMap<usize, Vec<u32>>,
    merged_chain: Vec<usize>,
    pending: Option<Pending>,
}

impl Client {
    pub fn new(
        params: ProtocolParams,
        cauchy: Arc<CauchyMatrix>,
        side: SideInformation,
        seed: u64,
    ) -> Result<Self, ProtocolError> {
        if cauchy.rows() != params.k() || cauchy.field() != params.field() {
            return Err(ProtocolError::InvalidParams(
                "Cauchy matrix does not match the parameters".into(),
            ));
        }
        if side.indices().len() != params.side_len() {
            return Err(ProtocolError::InvalidSideInformation(format!(
                "need {} side messages",
                params.side_len()
            )));
        }
        let known = side.iter().map(|(i, v)| (i, v.to_vec())).collect();
        Ok(Self {
            merged_chain: side.indices().to_vec(),
            params,
            cauchy,
            side,
            rng: ChaCha8Rng::seed_from_u64(seed),
            history: Vec::new(),
            known,
            pending: None,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn side_information(&self) -> &SideInformation {
        &self.side
    }

    pub fn history(&self) -> &[(PartitionQuery, RoundAnswer)] {
        &self.history
    }

    pub fn known(&self) -> &BTreeMap<usize, Vec<u32>> {
        &self.known
    }

    /// The block containing `S` after the latest decoded round.
    pub fn merged_chain(&self) -> &[usize] {
        &self.merged_chain
    }

    pub fn completed_rounds(&self) -> usize {
        self.history.len()
    }

    /// Builds the query for the next round.
    pub fn next_query(&mut self, demand: usize) -> Result<PartitionQuery, ProtocolError> {
        let round = self.completed_rounds() + 1;
        if round == 1 {
            self.build_query_round1(demand)
        } else {
            self.build_query_round(round, demand)
        }
    }

    fn check_demand(&self, demand: usize) -> Result<(), ProtocolError> {
        if demand == 0 || demand > self.params.k() {
            return Err(ProtocolError::DemandOutOfRange {
                index: demand,
                k: self.params.k(),
            });
        }
        if self.known.contains_key(&demand) {
            return Err(ProtocolError::DemandKnown { index: demand });
        }
        Ok(())
    }

    fn check_idle(&self, round: usize) -> Result<(), ProtocolError> {
        if let Some(p) = &self.pending {
            return Err(ProtocolError::ProtocolOrder(format!(
                "round {} is still awaiting its answer",
                p.query.round
            )));
        }
        if self.completed_rounds() + 1 != round {
            return Err(ProtocolError::ProtocolOrder(format!(
                "next round is {}, not {round}",
                self.completed_rounds() + 1
            )));
        }
        Ok(())
    }

    /// Round 1: `{W_1} ∪ S` plus a uniformly random partition of the rest
    /// into blocks of `M+1`, sent in uniformly random order.
    pub fn build_query_round1(&mut self, demand: usize) -> Result<PartitionQuery, ProtocolError> {
        self.check_idle(1)?;
        self.check_demand(demand)?;
        let size = self.params.block_size(1);
        let mut first: Vec<usize> = self.side.indices().to_vec();
        first.push(demand);
        let taken: BTreeSet<usize> = first.iter().copied().collect();
        let mut rest: Vec<usize> = (1..=self.params.k())
            .filter(|i| !taken.contains(i))
            .collect();
        rest.shuffle(&mut self.rng);
        let mut blocks = vec![first];
        blocks.extend(rest.chunks(size).map(<[usize]>::to_vec));
        blocks.shuffle(&mut self.rng);
        Ok(self.issue(PartitionQuery::new(1, blocks), demand))
    }

    /// Round `i >= 2`: the previous block holding `W_i` merged with the
    /// merged chain, the other previous blocks paired uniformly at random,
    /// all sent in uniformly random order.
    pub fn build_query_round(
        &mut self,
        round: usize,
        demand: usize,
    ) -> Result<PartitionQuery, ProtocolError> {
        if round == 1 {
            return self.build_query_round1(demand);
        }
        self.params.check_round(round)?;
        self.check_idle(round)?;
        self.check_demand(demand)?;
        let prev = &self.history.last().expect("round >= 2 has history").0;
        let chain = prev
            .blocks
            .iter()
            .position(|b| *b == self.merged_chain)
            .expect("merged chain is a block of the previous query");
        let target = prev
            .block_of(demand)
            .expect("previous query covers every index");
        debug_assert_ne!(chain, target);

        let mut merged = prev.blocks[chain].clone();
        merged.extend_from_slice(&prev.blocks[target]);
        let mut rest: Vec<&Vec<usize>> = prev
            .blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != chain && *i != target)
            .map(|(_, b)| b)
            .collect();
        rest.shuffle(&mut self.rng);
        let mut blocks = vec![merged];
        blocks.extend(
            rest.chunks(2)
                .map(|pair| [pair[0].as_slice(), pair[1].as_slice()].concat()),
        );
        blocks.shuffle(&mut self.rng);
        Ok(self.issue(PartitionQuery::new(round, blocks), demand))
    }

    fn issue(&mut self, query: PartitionQuery, demand: usize) -> PartitionQuery {
        self.pending = Some(Pending {
            query: query.clone(),
            demand,
        });
        query
    }

    /// Decodes the answer to the outstanding query. Round 1 recovers `W_1`;
    /// round `i >= 2` recovers the whole previous block holding `W_i`.
    pub fn decode_round(
        &mut self,
        answer: RoundAnswer,
    ) -> Result<BTreeMap<usize, Vec<u32>>, ProtocolError> {
        let pending = self
            .pending
            .as_ref()
            .ok_or_else(|| ProtocolError::ProtocolOrder("no query is outstanding".into()))?;
        let round = pending.query.round;
        if answer.round != round {
            return Err(ProtocolError::AnswerMismatch(format!(
                "answer is for round {}, query was round {round}",
                answer.round
            )));
        }
        let expected = self.params.packet_count(round);
        if answer.packets.len() != expected {
            return Err(ProtocolError::AnswerMismatch(format!(
                "{} packets, expected {expected}",
                answer.packets.len()
            )));
        }
        let m = self.params.symbols();
        if answer.symbols != m || answer.packets.iter().any(|p| p.len() != m) {
            return Err(ProtocolError::AnswerMismatch(format!(
                "packets must carry {m} symbols"
            )));
        }
        if answer
            .packets
            .iter()
            .flatten()
            .any(|&v| v >= self.params.q())
        {
            return Err(ProtocolError::AnswerMismatch(
                "non-canonical packet symbol".into(),
            ));
        }

        let Pending { query, demand } = self.pending.take().expect("checked above");
        self.history.push((query, answer));
        let result = if round == 1 {
            self.decode_first(demand)
        } else {
            self.decode_merged(demand)
        };
        match result {
            Ok(recovered) => Ok(recovered),
            Err(e) => {
                // Leave the client able to retry with a fresh answer.
                let (query, _) = self.history.pop().expect("just pushed");
                self.pending = Some(Pending { query, demand });
                Err(e)
            }
        }
    }

    fn decode_first(&mut self, demand: usize) -> Result<BTreeMap<usize, Vec<u32>>, ProtocolError> {
        let f = self.params.field();
        let (query, answer) = self.history.last().expect("current round");
        let pos = query.block_of(demand).expect("query covers demand");
        let block = query.blocks[pos].clone();
        let mut acc = answer.packets[pos].clone();
        for &s in &block {
            if s == demand {
                continue;
            }
            let coeff = self.cauchy.coefficient(s, 0);
            f.axpy(&mut acc, f.neg(coeff), &self.known[&s]);
        }
        let inv = f.inv(self.cauchy.coefficient(demand, 0))?;
        let value: Vec<u32> = acc.iter().map(|&v| f.mul(v, inv)).collect();
        self.known.insert(demand, value.clone());
        self.merged_chain = block;
        Ok(BTreeMap::from([(demand, value)]))
    }

    fn decode_merged(&mut self, demand: usize) -> Result<BTreeMap<usize, Vec<u32>>, ProtocolError> {
        let f = self.params.field();
        let side_len = self.params.side_len();
        let round = self.history.len();
        let prev = &self.history[round - 2].0;
        let target = prev.blocks[prev.block_of(demand).expect("covered")].clone();
        let column_of: BTreeMap<usize, usize> =
            target.iter().enumerate().map(|(c, &i)| (i, c)).collect();

        let n = target.len();
        let m = self.params.symbols();
        let mut system = FieldMatrix::zeros(f, 0, n);
        let mut rhs = FieldMatrix::zeros(f, 0, m);
        for (query, answer) in &self.history {
            let per_block = self.params.packets_per_block(query.round);
            for (b, block) in query.blocks.iter().enumerate() {
                let touches = block.iter().any(|i| column_of.contains_key(i));
                let solvable = block
                    .iter()
                    .all(|i| column_of.contains_key(i) || self.known.contains_key(i));
                if !touches || !solvable {
                    continue;
                }
                for (t, col) in round_column_range(query.round, side_len).enumerate() {
                    let mut row = vec![0u32; n];
                    let mut value = answer.packets[b * per_block + t].clone();
                    for &i in block {
                        let coeff = self.cauchy.coefficient(i, col);
                        match column_of.get(&i) {
                            Some(&c) => row[c] = coeff,
                            None => f.axpy(&mut value, f.neg(coeff), &self.known[&i]),
                        }
                    }
                    system.push_row(&row);
                    rhs.push_row(&value);
                }
            }
        }
        if system.rows() != n {
            return Err(ProtocolError::AnswerMismatch(format!(
                "collected {} equations for {n} unknowns",
                system.rows()
            )));
        }
        let solution = system.solve_columns(&rhs).map_err(|e| match e {
            FieldError::SingularMatrix => ProtocolError::SingularSystem { round },
            other => other.into(),
        })?;

        let mut recovered = BTreeMap::new();
        for (c, &i) in target.iter().enumerate() {
            let value = solution.row(c).to_vec();
            self.known.insert(i, value.clone());
            recovered.insert(i, value);
        }
        let mut chain = std::mem::take(&mut self.merged_chain);
        chain.extend_from_slice(&target);
        chain.sort_unstable();
        self.merged_chain = chain;
        Ok(recovered)
    }
}
