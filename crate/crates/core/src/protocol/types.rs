use std::collections::BTreeSet;

use rand::Rng;

use super::{ProtocolError, ProtocolParams};
use crate::cauchy::{round_column_range, CauchyMatrix};
use crate::field::{FieldMatrix, PrimeField};

/// The `K` messages held by the server, each a vector of `m` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    field: PrimeField,
    symbols: usize,
    messages: Vec<Vec<u32>>,
}

impl Database {
    pub fn new(field: PrimeField, messages: Vec<Vec<u32>>) -> Result<Self, ProtocolError> {
        let symbols = messages.first().map_or(0, Vec::len);
        if messages.is_empty() || symbols == 0 {
            return Err(ProtocolError::InvalidParams("database is empty".into()));
        }
        for (i, msg) in messages.iter().enumerate() {
            if msg.len() != symbols {
                return Err(ProtocolError::InvalidParams(format!(
                    "message {} has {} symbols, expected {symbols}",
                    i + 1,
                    msg.len()
                )));
            }
            if let Some(&v) = msg.iter().find(|&&v| v >= field.modulus()) {
                return Err(ProtocolError::InvalidParams(format!(
                    "message {} holds {v}, not an element of {field}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            field,
            symbols,
            messages,
        })
    }

    /// Uniformly random messages for the given parameters.
    pub fn random<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Self {
        let q = params.q();
        let messages = (0..params.k())
            .map(|_| {
                (0..params.symbols())
                    .map(|_| rng.random_range(0..q))
                    .collect()
            })
            .collect();
        Self {
            field: params.field(),
            symbols: params.symbols(),
            messages,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Message `index` (1-based).
    pub fn message(&self, index: usize) -> &[u32] {
        &self.messages[index - 1]
    }

    pub fn messages(&self) -> &[Vec<u32>] {
        &self.messages
    }

    pub fn check_matches(&self, params: &ProtocolParams) -> Result<(), ProtocolError> {
        if self.len() != params.k()
            || self.symbols != params.symbols()
            || self.field != params.field()
        {
            return Err(ProtocolError::InvalidParams(format!(
                "database is K={} m={} over {}, parameters want K={} m={} over {}",
                self.len(),
                self.symbols,
                self.field,
                params.k(),
                params.symbols(),
                params.field()
            )));
        }
        Ok(())
    }
}

/// The client's side information: `M` indices and their messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideInformation {
    indices: Vec<usize>,
    values: Vec<Vec<u32>>,
}

impl SideInformation {
    pub fn new(
        params: &ProtocolParams,
        indices: Vec<usize>,
        values: Vec<Vec<u32>>,
    ) -> Result<Self, ProtocolError> {
        let mut pairs: Vec<(usize, Vec<u32>)> = indices.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        let (indices, values): (Vec<usize>, Vec<Vec<u32>>) = pairs.into_iter().unzip();
        let distinct: BTreeSet<usize> = indices.iter().copied().collect();
        if indices.len() != params.side_len() || distinct.len() != indices.len() {
            return Err(ProtocolError::InvalidSideInformation(format!(
                "need {} distinct indices, got {indices:?}",
                params.side_len()
            )));
        }
        if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > params.k()) {
            return Err(ProtocolError::InvalidSideInformation(format!(
                "index {i} is outside 1..={}",
                params.k()
            )));
        }
        if values
            .iter()
            .any(|v| v.len() != params.symbols() || v.iter().any(|&s| s >= params.q()))
        {
            return Err(ProtocolError::InvalidSideInformation(
                "side message has the wrong length or a non-canonical symbol".into(),
            ));
        }
        Ok(Self { indices, values })
    }

    /// Copies the messages at `indices` out of `db`.
    pub fn from_database(
        params: &ProtocolParams,
        db: &Database,
        indices: &[usize],
    ) -> Result<Self, ProtocolError> {
        if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > db.len()) {
            return Err(ProtocolError::InvalidSideInformation(format!(
                "index {i} is outside 1..={}",
                db.len()
            )));
        }
        let values = indices.iter().map(|&i| db.message(i).to_vec()).collect();
        Self::new(params, indices.to_vec(), values)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[Vec<u32>] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[u32])> {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().map(Vec::as_slice))
    }
}

/// One round's query: an ordered partition of `1..=K`. Indices inside each
/// block are kept sorted; block order is whatever the client sent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionQuery {
    pub round: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl PartitionQuery {
    /// Sorts every block; block order is left alone.
    pub fn new(round: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        Self { round, blocks }
    }

    /// Position of the block containing `index`.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&index).is_ok())
    }

    /// Checks that the blocks are disjoint, non-empty, and cover `1..=k`.
    pub fn check_partition(&self, k: usize) -> Result<(), String> {
        let mut seen = vec![false; k + 1];
        let mut total = 0;
        for (i, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(format!("block {i} is empty"));
            }
            for &v in block {
                if v == 0 || v > k {
                    return Err(format!("index {v} is outside 1..={k}"));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(format!("index {v} appears twice"));
                }
                total += 1;
            }
        }
        if total != k {
            return Err(format!("blocks cover {total} of {k} indices"));
        }
        Ok(())
    }

    /// Full structural check against the parameters and the previous
    /// round's query: partition, block count and size, and (for `round >= 2`)
    /// every block being the union of exactly two previous blocks.
    pub fn validate(
        &self,
        params: &ProtocolParams,
        previous: Option<&PartitionQuery>,
    ) -> Result<(), ProtocolError> {
        let malformed = ProtocolError::MalformedQuery;
        params.check_round(self.round)?;
        self.check_partition(params.k()).map_err(malformed)?;
        let (count, size) = (
            params.block_count(self.round),
            params.block_size(self.round),
        );
        if self.blocks.len() != count {
            return Err(malformed(format!(
                "round {} needs {count} blocks, got {}",
                self.round,
                self.blocks.len()
            )));
        }
        if let Some(b) = self.blocks.iter().find(|b| b.len() != size) {
            return Err(malformed(format!(
                "round {} blocks have size {size}, found one of size {}",
                self.round,
                b.len()
            )));
        }
        if self.round >= 2 {
            let prev = previous.ok_or_else(|| {
                ProtocolError::ProtocolOrder(format!("round {} has no previous query", self.round))
            })?;
            if prev.round + 1 != self.round {
                return Err(ProtocolError::ProtocolOrder(format!(
                    "round {} follows round {}",
                    self.round, prev.round
                )));
            }
            for block in &self.blocks {
                if !is_union_of_two(block, prev) {
                    return Err(malformed(format!(
                        "block {block:?} is not the union of two round-{} blocks",
                        prev.round
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether `block` is exactly the union of two blocks of `prev`.
pub(crate) fn is_union_of_two(block: &[usize], prev: &PartitionQuery) -> bool {
    let mut parts: Vec<usize> = block.iter().filter_map(|&v| prev.block_of(v)).collect();
    parts.sort_unstable();
    parts.dedup();
    parts.len() == 2 && parts.iter().map(|&p| prev.blocks[p].len()).sum::<usize>() == block.len()
}

/// The server's reply to one query: coded packets ordered by block (query
/// order) and then by Cauchy column (ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundAnswer {
    pub round: usize,
    pub symbols: usize,
    pub packets: Vec<Vec<u32>>,
}

impl RoundAnswer {
    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }
}

/// Coefficient rows (over all `K` messages) of the packets answering
/// `query`, in packet order.
pub fn query_coefficients(
    c: &CauchyMatrix,
    side_len: usize,
    query: &PartitionQuery,
) -> FieldMatrix {
    let k = c.rows();
    let mut out = FieldMatrix::zeros(c.field(), 0, k);
    let mut row = vec![0u32; k];
    for block in &query.blocks {
        for col in round_column_range(query.round, side_len) {
            row.fill(0);
            for &i in block {
                row[i - 1] = c.coefficient(i, col);
            }
            out.push_row(&row);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::build_cauchy;

    fn params() -> ProtocolParams {
        ProtocolParams::new(12, 2, 17, 1).unwrap()
    }

    fn round1() -> PartitionQuery {
        PartitionQuery::new(
            1,
            vec![
                vec![4, 5, 6],
                vec![1, 2, 3],
                vec![10, 11, 12],
                vec![7, 8, 9],
            ],
        )
    }

    #[test]
    fn partition_checks() {
        assert!(round1().check_partition(12).is_ok());
        let overlap = PartitionQuery::new(1, vec![vec![1, 2], vec![2, 3]]);
        assert!(overlap.check_partition(4).unwrap_err().contains("twice"));
        let gap = PartitionQuery::new(1, vec![vec![1, 2], vec![3]]);
        assert!(gap.check_partition(4).is_err());
        let out_of_range = PartitionQuery::new(1, vec![vec![0, 1], vec![2, 3]]);
        assert!(out_of_range.check_partition(4).is_err());
    }

    #[test]
    fn validate_rounds() {
        let p = params();
        let r1 = round1();
        r1.validate(&p, None).unwrap();
        let r2 = PartitionQuery::new(2, vec![(7..=12).collect(), (1..=6).collect()]);
        r2.validate(&p, Some(&r1)).unwrap();

        let split = PartitionQuery::new(2, vec![vec![1, 2, 3, 4, 5, 7], vec![6, 8, 9, 10, 11, 12]]);
        assert!(matches!(
            split.validate(&p, Some(&r1)),
            Err(ProtocolError::MalformedQuery(_))
        ));
        let wrong_size = PartitionQuery::new(1, vec![(1..=6).collect(), (7..=12).collect()]);
        assert!(matches!(
            wrong_size.validate(&p, None),
            Err(ProtocolError::MalformedQuery(_))
        ));
        assert!(matches!(
            r2.validate(&p, None),
            Err(ProtocolError::ProtocolOrder(_))
        ));
        let r4 = PartitionQuery::new(4, vec![(1..=12).collect()]);
        assert!(matches!(
            r4.validate(&p, None),
            Err(ProtocolError::RoundsExhausted { round: 4, max: 3 })
        ));
    }

    #[test]
    fn coefficient_rows_follow_packet_order() {
        let c = build_cauchy(17, 12, 2, 2).unwrap();
        let q = PartitionQuery::new(2, vec![(1..=6).collect(), (7..=12).collect()]);
        let rows = query_coefficients(&c, 2, &q);
        assert_eq!(rows.rows(), 4);
        assert_eq!(rows.row(0), &[13, 7, 3, 5, 15, 2, 0, 0, 0, 0, 0, 0]);
        assert_eq!(rows.row(1), &[6, 13, 7, 3, 5, 15, 0, 0, 0, 0, 0, 0]);
        assert_eq!(rows.row(2), &[0, 0, 0, 0, 0, 0, 12, 14, 10, 4, 11, 8]);
        assert_eq!(rows.row(3), &[0, 0, 0, 0, 0, 0, 2, 12, 14, 10, 4, 11]);
    }

    #[test]
    fn side_information_validation() {
        let p = params();
        let f = p.field();
        let db = Database::new(f, (1..=12).map(|k| vec![k]).collect()).unwrap();
        let side = SideInformation::from_database(&p, &db, &[3, 2]).unwrap();
        assert_eq!(side.indices(), &[2, 3]);
        assert_eq!(side.values(), &[vec![2], vec![3]]);
        assert!(SideInformation::from_database(&p, &db, &[2]).is_err());
        assert!(SideInformation::from_database(&p, &db, &[2, 2]).is_err());
        assert!(SideInformation::from_database(&p, &db, &[2, 13]).is_err());
        assert!(Database::new(f, vec![vec![1], vec![17]]).is_err());
        assert!(Database::new(f, vec![vec![1], vec![1, 2]]).is_err());
    }
}
