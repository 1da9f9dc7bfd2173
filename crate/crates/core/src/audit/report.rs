use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use super::{capacity, measured_rate, posterior, rank_bound, rank_profile, AuditError, RoundRank};
use crate::protocol::Transcript;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    pub packets: usize,
    pub rate: String,
    pub capacity: String,
    pub rank: usize,
    pub rank_bound: usize,
}

/// Everything the `audit` command prints. Rationals are rendered as `a/b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub k: usize,
    pub side_len: usize,
    pub q: u32,
    pub rounds: Vec<RoundSummary>,
    /// `posterior[j-1][w-1] = P(W_j = w | queries)`.
    pub posterior: Vec<Vec<String>>,
    pub consistent_hypotheses: Vec<u64>,
    pub checks: Vec<Check>,
}

fn show(r: &BigRational) -> String {
    r.to_string()
}

impl AuditReport {
    /// Runs every check on `transcript`. Structural problems that make the
    /// posterior undefined are returned as errors.
    pub fn build(transcript: &Transcript) -> Result<Self, AuditError> {
        let params = &transcript.params;
        let (k, side_len) = (params.k(), params.side_len());
        transcript
            .validate()
            .map_err(|e| AuditError::InconsistentTranscript(e.to_string()))?;
        let table = posterior(transcript)?;
        let ranks = rank_profile(transcript)?;

        let mut rounds = Vec::with_capacity(ranks.len());
        let mut rate_ok = true;
        let mut rank_ok = true;
        for &RoundRank {
            round,
            rank,
            packets,
        } in &ranks
        {
            let rate = measured_rate(transcript, round)?;
            let cap = capacity(k, side_len, round)?;
            let bound = rank_bound(k, side_len, round)?;
            rate_ok &= rate == cap;
            rank_ok &= rank == bound && rank == packets;
            rounds.push(RoundSummary {
                round,
                packets,
                rate: show(&rate),
                capacity: show(&cap),
                rank,
                rank_bound: bound,
            });
        }

        let uniform = table.is_uniform();
        let checks = vec![
            Check {
                name: "privacy".into(),
                passed: uniform,
                detail: format!(
                    "posterior {} 1/{k} for every round and index",
                    if uniform { "equals" } else { "differs from" }
                ),
            },
            Check {
                name: "rate".into(),
                passed: rate_ok,
                detail: "measured rate equals capacity at every round".into(),
            },
            Check {
                name: "rank".into(),
                passed: rank_ok,
                detail: "answer rank equals packet count and lower bound at every round".into(),
            },
        ];
        Ok(Self {
            k,
            side_len,
            q: params.q(),
            rounds,
            posterior: table
                .rows
                .iter()
                .map(|row| row.iter().map(show).collect())
                .collect(),
            consistent_hypotheses: table.consistent,
            checks,
        })
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "K = {}, M = {}, q = {}", self.k, self.side_len, self.q)?;
        writeln!(f, "round  packets  rate   capacity  rank  bound")?;
        for r in &self.rounds {
            writeln!(
                f,
                "{:<6} {:<8} {:<6} {:<9} {:<5} {}",
                r.round, r.packets, r.rate, r.capacity, r.rank, r.rank_bound
            )?;
        }
        writeln!(f, "posterior P(W_j = w):")?;
        for (j, row) in self.posterior.iter().enumerate() {
            writeln!(f, "  W_{}: {}", j + 1, row.join(" "))?;
        }
        writeln!(
            f,
            "consistent hypotheses per round: {:?}",
            self.consistent_hypotheses
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}
