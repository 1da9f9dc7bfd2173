use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::AuditError;
use crate::protocol::{merge_depth, query_coefficients, Transcript};

/// Per-round scalar-linear capacity: `(M+1)/K` at round 1 and
/// `2^(i-1) (M+1) / (K M)` afterwards.
pub fn capacity(k: usize, side_len: usize, round: usize) -> Result<BigRational, AuditError> {
    let l = merge_depth(k, side_len).ok_or_else(|| {
        AuditError::InvalidParams(format!(
            "K/(M+1) must be a power of two >= 2 (K = {k}, M = {side_len})"
        ))
    })?;
    if round == 0 || round > l + 1 {
        return Err(AuditError::InvalidParams(format!(
            "round {round} outside 1..={}",
            l + 1
        )));
    }
    let m1 = BigInt::from(side_len + 1);
    Ok(if round == 1 {
        BigRational::new(m1, BigInt::from(k))
    } else {
        BigRational::new(m1 << (round - 1), BigInt::from(k * side_len))
    })
}

/// Minimum number of packets any scheme must send at `round`:
/// `K/(M+1)` at round 1 and `K M / (2^(i-1) (M+1))` afterwards.
pub fn rank_bound(k: usize, side_len: usize, round: usize) -> Result<usize, AuditError> {
    let c = capacity(k, side_len, round)?;
    let inv = c.recip();
    debug_assert!(inv.is_integer());
    Ok(inv.to_integer().try_into().expect("bound fits in usize"))
}

/// Message size over download size at `round`. Every packet is one message
/// long, so this is `1 / packets`.
pub fn measured_rate(transcript: &Transcript, round: usize) -> Result<BigRational, AuditError> {
    let r = transcript
        .round(round)
        .ok_or(AuditError::MissingRound(round))?;
    if r.cost() == 0 {
        return Err(AuditError::InconsistentTranscript(format!(
            "round {round} has no packets"
        )));
    }
    Ok(BigRational::new(BigInt::from(1), BigInt::from(r.cost())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRank {
    pub round: usize,
    /// Rank of the answer matrix whose rows are the packets' coefficient
    /// vectors over all `K` messages.
    pub rank: usize,
    pub packets: usize,
}

pub fn rank_profile(transcript: &Transcript) -> Result<Vec<RoundRank>, AuditError> {
    if transcript.rounds.is_empty() {
        return Err(AuditError::EmptyTranscript);
    }
    let side_len = transcript.params.side_len();
    Ok(transcript
        .rounds
        .iter()
        .map(|r| RoundRank {
            round: r.query.round,
            rank: query_coefficients(&transcript.cauchy, side_len, &r.query).rank(),
            packets: r.cost(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cauchy::{build_cauchy, default_matrix};
    use crate::protocol::{run_session, Database, ProtocolParams};

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(12, 2, 1).unwrap(), frac(1, 4));
        assert_eq!(capacity(12, 2, 2).unwrap(), frac(1, 4));
        assert_eq!(capacity(12, 2, 3).unwrap(), frac(1, 2));
        assert_eq!(capacity(8, 3, 2).unwrap(), frac(1, 3));
        assert_eq!(capacity(4, 1, 2).unwrap(), frac(1, 1));
        assert!(capacity(12, 3, 1).is_err());
        assert!(capacity(9, 2, 1).is_err());
        assert!(capacity(3, 2, 1).is_err());
        assert!(capacity(12, 2, 4).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(rank_bound(12, 2, 1).unwrap(), 4);
        assert_eq!(rank_bound(12, 2, 2).unwrap(), 4);
        assert_eq!(rank_bound(12, 2, 3).unwrap(), 2);
        assert_eq!(rank_bound(8, 1, 2).unwrap(), 2);
        assert_eq!(rank_bound(16, 3, 3).unwrap(), 3);
    }

    #[test]
    fn worked_example_ranks() {
        let params = ProtocolParams::new(12, 2, 17, 1).unwrap();
        let db = Database::new(params.field(), (1..=12).map(|k| vec![k]).collect()).unwrap();
        let c = Arc::new(build_cauchy(17, 12, 2, 2).unwrap());
        let out = run_session(params, c, Arc::new(db), &[2, 3], &[1, 4, 7], 618).unwrap();
        let ranks: Vec<usize> = rank_profile(&out.transcript)
            .unwrap()
            .iter()
            .map(|r| r.rank)
            .collect();
        assert_eq!(ranks, vec![4, 4, 2]);
        assert_eq!(measured_rate(&out.transcript, 1).unwrap(), frac(1, 4));
        assert_eq!(measured_rate(&out.transcript, 3).unwrap(), frac(1, 2));
        assert_eq!(
            measured_rate(&out.transcript, 4),
            Err(AuditError::MissingRound(4))
        );
    }

    #[test]
    fn eight_one_round_two() {
        let c = default_matrix(8, 1, 2).unwrap();
        let params = ProtocolParams::new(8, 1, c.field().modulus().into(), 1).unwrap();
        let db = Database::new(params.field(), (1..=8).map(|k| vec![k * 10]).collect()).unwrap();
        let out = run_session(params, c, Arc::new(db), &[5], &[2, 7], 3).unwrap();
        let profile = rank_profile(&out.transcript).unwrap();
        assert_eq!(profile[1].rank, 2);
        assert_eq!(profile[1].packets, 2);
    }
}
