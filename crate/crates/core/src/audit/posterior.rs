use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::AuditError;
use crate::protocol::{merge_depth, Transcript};
use crate::util::{binomial, factorial, for_each_combination, perfect_matchings, set_partitions};

/// `P(W_j = w | all queries)` for every round `j` of a transcript and every
/// index `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosteriorTable {
    /// `rows[j-1][w-1]`.
    pub rows: Vec<Vec<BigRational>>,
    /// Hypotheses whose first `j` rounds are consistent with the transcript,
    /// indexed by `j-1`.
    pub consistent: Vec<u64>,
}

impl PosteriorTable {
    pub fn get(&self, round: usize, index: usize) -> &BigRational {
        &self.rows[round - 1][index - 1]
    }

    /// Whether every entry equals `1/K` exactly.
    pub fn is_uniform(&self) -> bool {
        self.rows.iter().all(|row| {
            let target = BigRational::new(BigInt::one(), BigInt::from(row.len()));
            row.iter().all(|p| *p == target)
        })
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(BigRational::zero(), |acc, p| acc + p))
            .collect()
    }
}

type Mask = u128;

fn mask_of(block: &[usize]) -> Mask {
    block.iter().fold(0, |m, &i| m | (1 << (i - 1)))
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Per-round view of the observed queries as bitmasks.
struct Observed {
    k: usize,
    side_len: usize,
    rounds: Vec<Vec<Mask>>,
}

impl Observed {
    fn block_containing(&self, round: usize, index: usize) -> usize {
        let bit = 1 << (index - 1);
        self.rounds[round - 1]
            .iter()
            .position(|&b| b & bit != 0)
            .expect("queries are partitions")
    }

    /// Probability that round 1 produced the observed ordered partition
    /// given `{w} ∪ S`.
    fn round1_likelihood(&self, first: Mask) -> BigRational {
        let blocks = &self.rounds[0];
        let size = self.side_len + 1;
        if !blocks.contains(&first) || blocks.iter().any(|b| b.count_ones() as usize != size) {
            return BigRational::zero();
        }
        let rest = (self.k - size) as u64;
        let ways = set_partitions(rest, size as u64) * factorial(blocks.len() as u64);
        BigRational::new(BigInt::one(), ways.into())
    }

    /// Probability that round `round >= 2` produced the observed ordered
    /// partition, given the chain block and the demand's block of the
    /// previous round.
    fn merge_likelihood(&self, round: usize, chain: usize, target: usize) -> BigRational {
        let prev = &self.rounds[round - 2];
        let cur = &self.rounds[round - 1];
        let merged = prev[chain] | prev[target];
        if !cur.contains(&merged) {
            return BigRational::zero();
        }
        let rest: Vec<Mask> = prev
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != chain && i != target)
            .map(|(_, &b)| b)
            .collect();
        // Every other observed block must be the union of two of the rest.
        for &block in cur.iter().filter(|&&b| b != merged) {
            let parts = rest.iter().filter(|&&r| r & block != 0).count();
            let covered = rest
                .iter()
                .filter(|&&r| r & block != 0)
                .fold(0, |acc, &r| acc | r);
            if parts != 2 || covered != block {
                return BigRational::zero();
            }
        }
        if cur.len() != rest.len() / 2 + 1 {
            return BigRational::zero();
        }
        let ways = perfect_matchings(rest.len() as u64) * factorial(cur.len() as u64);
        BigRational::new(BigInt::one(), ways.into())
    }
}

struct Accumulator {
    rows: Vec<Vec<BigRational>>,
    total: BigRational,
    consistent: Vec<u64>,
}

/// Exact posterior over every round's demand.
///
/// Enumerates every side-information set `S~` and every demand sequence
/// `W~_1..W~_t`, weighting each by its prior and by the probability that
/// the client's randomness produced exactly the observed ordered partitions.
/// A demand is only admissible while its message is still unknown to the
/// hypothetical client.
pub fn posterior(transcript: &Transcript) -> Result<PosteriorTable, AuditError> {
    let params = &transcript.params;
    let (k, side_len) = (params.k(), params.side_len());
    let t = transcript.rounds.len();
    if t == 0 {
        return Err(AuditError::EmptyTranscript);
    }
    if k > Mask::BITS as usize {
        return Err(AuditError::TooLarge(k));
    }
    if merge_depth(k, side_len).is_none() {
        return Err(AuditError::InvalidParams(format!(
            "K = {k}, M = {side_len}"
        )));
    }
    let mut rounds = Vec::with_capacity(t);
    for (i, r) in transcript.rounds.iter().enumerate() {
        r.query
            .check_partition(k)
            .map_err(|e| AuditError::InconsistentTranscript(format!("round {}: {e}", i + 1)))?;
        rounds.push(r.query.blocks.iter().map(|b| mask_of(b)).collect());
    }
    let observed = Observed {
        k,
        side_len,
        rounds,
    };

    let mut acc = Accumulator {
        rows: vec![vec![BigRational::zero(); k]; t],
        total: BigRational::zero(),
        consistent: vec![0; t],
    };
    let prior_side = ratio(1, binomial(k as u64, side_len as u64));
    let prior_first = ratio(1, k - side_len);
    let all: Vec<usize> = (1..=k).collect();
    let mut demands = Vec::with_capacity(t);
    for_each_combination(&all, side_len, &mut |side| {
        let side_mask = mask_of(side);
        for w in (1..=k).filter(|w| side_mask & (1 << (w - 1)) == 0) {
            let known = side_mask | (1 << (w - 1));
            let lik = observed.round1_likelihood(known);
            if lik.is_zero() {
                continue;
            }
            let weight = &prior_side * &prior_first * lik;
            demands.push(w);
            extend(&observed, 2, known, weight, &mut demands, &mut acc);
            demands.pop();
        }
        true
    });

    if acc.total.is_zero() {
        return Err(AuditError::InconsistentTranscript(
            "no side-information set and demand sequence explains the queries".into(),
        ));
    }
    let rows = acc
        .rows
        .into_iter()
        .map(|row| row.into_iter().map(|p| p / &acc.total).collect())
        .collect();
    Ok(PosteriorTable {
        rows,
        consistent: acc.consistent,
    })
}

/// Extends a consistent prefix of `round - 1` demands by one more round.
fn extend(
    observed: &Observed,
    round: usize,
    known: Mask,
    weight: BigRational,
    demands: &mut Vec<usize>,
    acc: &mut Accumulator,
) {
    acc.consistent[round - 2] += 1;
    let t = observed.rounds.len();
    if round > t {
        for (j, &w) in demands.iter().enumerate() {
            acc.rows[j][w - 1] += &weight;
        }
        acc.total += weight;
        return;
    }
    let prev = &observed.rounds[round - 2];
    let Some(chain) = prev.iter().position(|&b| b == known) else {
        return;
    };
    let prior = ratio(1, observed.k - known.count_ones() as usize);
    for w in (1..=observed.k).filter(|w| known & (1 << (w - 1)) == 0) {
        let target = observed.block_containing(round - 1, w);
        let lik = observed.merge_likelihood(round, chain, target);
        if lik.is_zero() {
            continue;
        }
        demands.push(w);
        extend(
            observed,
            round + 1,
            known | prev[target],
            &weight * &prior * lik,
            demands,
            acc,
        );
        demands.pop();
    }
}
