use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::cauchy::column_count;
use crate::field::PrimeField;

/// Shape of one protocol instance: `K = (M+1) 2^l` messages, side
/// information of size `M`, messages of `symbols` elements of `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    k: usize,
    side_len: usize,
    l: usize,
    field: PrimeField,
    symbols: usize,
}

/// Returns `l` when `k / (side_len + 1) = 2^l` with `l >= 1`.
pub fn merge_depth(k: usize, side_len: usize) -> Option<usize> {
    if side_len == 0 || !k.is_multiple_of(side_len + 1) {
        return None;
    }
    let blocks = k / (side_len + 1);
    if blocks < 2 || !blocks.is_power_of_two() {
        return None;
    }
    Some(blocks.trailing_zeros() as usize)
}

impl ProtocolParams {
    pub fn new(k: usize, side_len: usize, q: u64, symbols: usize) -> Result<Self, ProtocolError> {
        let l = merge_depth(k, side_len).ok_or_else(|| {
            ProtocolError::InvalidParams(format!(
                "K/(M+1) = {k}/{} must be a power of two >= 2",
                side_len + 1
            ))
        })?;
        let field = PrimeField::new(q).map_err(|e| ProtocolError::InvalidParams(e.to_string()))?;
        let required = (k + column_count(side_len, l)) as u64;
        if q < required {
            return Err(ProtocolError::InvalidParams(format!(
                "q = {q} is too small: need q >= K + M*l + 1 = {required}"
            )));
        }
        if symbols == 0 {
            return Err(ProtocolError::InvalidParams(
                "messages need at least one symbol".into(),
            ));
        }
        if k > usize::from(u16::MAX) || symbols > usize::from(u16::MAX) {
            return Err(ProtocolError::InvalidParams(format!(
                "K = {k} or m = {symbols} exceeds the wire limit of {}",
                u16::MAX
            )));
        }
        Ok(Self {
            k,
            side_len,
            l,
            field,
            symbols,
        })
    }

    /// Number of messages `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Side-information size `M`.
    pub fn side_len(&self) -> usize {
        self.side_len
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    /// Symbols per message `m`.
    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// Last admissible round, `l + 1`.
    pub fn max_rounds(&self) -> usize {
        self.l + 1
    }

    /// Blocks in a round-`round` query: `K / (2^(round-1) (M+1))`.
    pub fn block_count(&self, round: usize) -> usize {
        self.k / self.block_size(round)
    }

    /// Size of every block of a round-`round` query: `2^(round-1) (M+1)`.
    pub fn block_size(&self, round: usize) -> usize {
        (self.side_len + 1) << (round - 1)
    }

    /// Packets per block: 1 in round 1, `M` afterwards.
    pub fn packets_per_block(&self, round: usize) -> usize {
        if round == 1 {
            1
        } else {
            self.side_len
        }
    }

    /// Download cost of a round in packets (each one message long).
    pub fn packet_count(&self, round: usize) -> usize {
        self.block_count(round) * self.packets_per_block(round)
    }

    /// Message entropy `L = m log2 q` in bits.
    pub fn message_bits(&self) -> f64 {
        self.symbols as f64 * self.field.symbol_bits()
    }

    pub fn check_round(&self, round: usize) -> Result<(), ProtocolError> {
        if round == 0 || round > self.max_rounds() {
            return Err(ProtocolError::RoundsExhausted {
                round,
                max: self.max_rounds(),
            });
        }
        Ok(())
    }
}
