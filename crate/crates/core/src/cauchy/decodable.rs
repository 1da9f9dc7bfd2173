//! Checks that a Cauchy matrix can decode every round of the protocol.
//!
//! At round `i >= 2` the client solves for one round-`(i-1)` block `B` of
//! `2^(i-2)(M+1)` messages. Its equations are one column-1 packet per round-1
//! block inside `B`, `M` packets per round-`j` block inside `B` for
//! `2 <= j <= i-1`, and the `M` round-`i` packets of the block containing `B`.
//! The system depends only on `B` and the merge tree of round-1 blocks that
//! built it. Square submatrices of a Cauchy matrix are always invertible, but
//! these block-sparse systems are not, so a matrix has to be checked against
//! every tree before it can be trusted.
//!
//! A merge tree over `2^h` leaves is stored as its leaf list in tree order:
//! the level-`j` nodes are the runs `leaves[a*2^j .. (a+1)*2^j]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{build_cauchy, column_count, round_column_range, CauchyError, CauchyMatrix};
use crate::field::{next_prime, FieldMatrix, PrimeField, MAX_MODULUS};
use crate::util::{binomial, for_each_combination};

/// Structure counts up to this bound are verified exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 2_000_000;

/// Random structures drawn per round when the count exceeds the limit.
const SAMPLES_PER_ROUND: usize = 200_000;

/// Random point sets tried per modulus during the search.
const ATTEMPTS_PER_MODULUS: usize = 3;

const SEARCH_SEED: u64 = 0x4f50_4952_6361_7563;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodabilityReport {
    pub systems_checked: u64,
    pub coverage: Coverage,
}

/// Number of distinct decode systems that can arise at `round`.
pub fn decode_structure_count(k: usize, side_len: usize, round: usize) -> u128 {
    if round < 2 {
        return 0;
    }
    let h = round - 2;
    let block = (side_len + 1) << h;
    if block > k {
        return 0;
    }
    binomial(k as u64, block as u64).saturating_mul(tree_count(side_len + 1, h))
}

/// Unordered merge trees of height `h` over a fixed set of `leaf_size << h` items.
fn tree_count(leaf_size: usize, h: usize) -> u128 {
    if h == 0 {
        return 1;
    }
    let size = (leaf_size << h) as u64;
    let sub = tree_count(leaf_size, h - 1);
    binomial(size - 1, size / 2 - 1)
        .saturating_mul(sub)
        .saturating_mul(sub)
}

/// The decode system for `leaves` at round `log2(leaves.len()) + 2`, with
/// columns ordered as the concatenated leaves.
pub(crate) fn decode_system(
    c: &CauchyMatrix,
    side_len: usize,
    leaves: &[Vec<usize>],
) -> FieldMatrix {
    let h = leaves.len().trailing_zeros() as usize;
    debug_assert!(leaves.len().is_power_of_two());
    let members: Vec<usize> = leaves.iter().flatten().copied().collect();
    let n = members.len();
    let mut system = FieldMatrix::zeros(c.field(), 0, n);
    let mut row = vec![0u32; n];
    for level in 0..=h + 1 {
        let span = 1usize << level.min(h);
        let nodes = if level > h { 1 } else { leaves.len() / span };
        for node in 0..nodes {
            let start: usize = leaves[..node * span].iter().map(Vec::len).sum();
            let len: usize = leaves[node * span..(node + 1) * span]
                .iter()
                .map(Vec::len)
                .sum();
            for col in round_column_range(level + 1, side_len) {
                row.fill(0);
                for pos in start..start + len {
                    row[pos] = c.coefficient(members[pos], col);
                }
                system.push_row(&row);
            }
        }
    }
    system
}

/// Visits every merge tree over `set` with `2^h` leaves.
fn for_each_tree(set: &[usize], h: usize, visit: &mut dyn FnMut(&[Vec<usize>]) -> bool) -> bool {
    if h == 0 {
        return visit(&[set.to_vec()]);
    }
    let (first, rest) = set.split_first().expect("non-empty set");
    let half = set.len() / 2;
    for_each_combination(rest, half - 1, &mut |partners| {
        let mut left = Vec::with_capacity(half);
        left.push(*first);
        left.extend_from_slice(partners);
        let right: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|v| !partners.contains(v))
            .collect();
        for_each_tree(&left, h - 1, &mut |lt| {
            for_each_tree(&right, h - 1, &mut |rt| {
                let mut leaves = lt.to_vec();
                leaves.extend_from_slice(rt);
                visit(&leaves)
            })
        })
    })
}

fn random_tree(rng: &mut ChaCha8Rng, k: usize, leaf_size: usize, h: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<usize> = (1..=k).collect();
    all.shuffle(rng);
    all.truncate(leaf_size << h);
    all.chunks(leaf_size)
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Checks every decode system of rounds `2..=l+1` (or a large random sample
/// of them when there are more than [`EXHAUSTIVE_LIMIT`]).
pub fn verify_decodable(
    c: &CauchyMatrix,
    side_len: usize,
    l: usize,
) -> Result<DecodabilityReport, CauchyError> {
    let k = c.rows();
    if c.cols() < column_count(side_len, l) {
        return Err(CauchyError::RoundOutOfRange {
            round: l + 1,
            max: (c.cols().saturating_sub(1)) / side_len.max(1) + 1,
        });
    }
    let total: u128 = (2..=l + 1)
        .map(|i| decode_structure_count(k, side_len, i))
        .fold(0, u128::saturating_add);
    let exhaustive = total <= EXHAUSTIVE_LIMIT;
    let mut checked = 0u64;
    let mut failure = None;
    let leaf_size = side_len + 1;
    let all: Vec<usize> = (1..=k).collect();
    for round in 2..=l + 1 {
        let h = round - 2;
        let block = leaf_size << h;
        let mut check = |leaves: &[Vec<usize>]| {
            checked += 1;
            if decode_system(c, side_len, leaves).rank() < block {
                failure = Some(CauchyError::Undecodable {
                    round,
                    leaves: leaves.to_vec(),
                });
                return false;
            }
            true
        };
        if exhaustive {
            for_each_combination(&all, block, &mut |set| for_each_tree(set, h, &mut check));
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED ^ round as u64);
            for _ in 0..SAMPLES_PER_ROUND {
                if !check(&random_tree(&mut rng, k, leaf_size, h)) {
                    break;
                }
            }
        }
        if let Some(err) = failure.take() {
            return Err(err);
        }
    }
    Ok(DecodabilityReport {
        systems_checked: checked,
        coverage: if exhaustive {
            Coverage::Exhaustive
        } else {
            Coverage::Sampled
        },
    })
}

/// Deterministic search for a Cauchy matrix that passes [`verify_decodable`].
///
/// Starts with the canonical points at the smallest admissible prime. Failing
/// that, tries seeded random point sets, starting from a modulus a few times
/// larger than the number of decode systems and roughly doubling it.
pub fn find_decodable(k: usize, side_len: usize, l: usize) -> Result<CauchyMatrix, CauchyError> {
    let needed = k + column_count(side_len, l);
    let mut q = next_prime(needed as u64);
    let canonical = build_cauchy(q, k, side_len, l)?;
    if verify_decodable(&canonical, side_len, l).is_ok() {
        return Ok(canonical);
    }
    let systems: u128 = (2..=l + 1)
        .map(|i| decode_structure_count(k, side_len, i))
        .fold(0, u128::saturating_add)
        .min(EXHAUSTIVE_LIMIT);
    q = (q * 2).max(16 * systems as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED ^ ((k as u64) << 32) ^ side_len as u64);
    loop {
        q = next_prime(q);
        if q >= MAX_MODULUS {
            return Err(CauchyError::NoDecodableMatrix);
        }
        let field = PrimeField::new(q)?;
        for _ in 0..ATTEMPTS_PER_MODULUS {
            let points: Vec<u32> = index::sample(&mut rng, q as usize, needed)
                .into_iter()
                .map(|v| v as u32)
                .collect();
            let (xs, ys) = points.split_at(k);
            let candidate = CauchyMatrix::from_points(field, xs.to_vec(), ys.to_vec())?;
            if verify_decodable(&candidate, side_len, l).is_ok() {
                return Ok(candidate);
            }
        }
        q *= 2;
    }
}

type MatrixCache = Mutex<HashMap<(usize, usize, usize), Arc<CauchyMatrix>>>;

/// [`find_decodable`], memoized per `(K, M, l)` for the life of the process.
pub fn default_matrix(
    k: usize,
    side_len: usize,
    l: usize,
) -> Result<Arc<CauchyMatrix>, CauchyError> {
    static CACHE: OnceLock<MatrixCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("cache lock").get(&(k, side_len, l)) {
        return Ok(Arc::clone(c));
    }
    let found = Arc::new(find_decodable(k, side_len, l)?);
    let mut guard = cache.lock().expect("cache lock");
    Ok(Arc::clone(guard.entry((k, side_len, l)).or_insert(found)))
}
