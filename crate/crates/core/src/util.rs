//! Small combinatorial helpers shared by the verifiers.

use num_bigint::BigUint;
use num_traits::One;

/// Calls `visit` with every `k`-subset of `items`, in lexicographic order of
/// positions. Stops early when `visit` returns `false`; returns whether the
/// enumeration ran to completion.
pub fn for_each_combination<T: Copy>(
    items: &[T],
    k: usize,
    visit: &mut impl FnMut(&[T]) -> bool,
) -> bool {
    fn go<T: Copy>(
        items: &[T],
        start: usize,
        k: usize,
        cur: &mut Vec<T>,
        visit: &mut impl FnMut(&[T]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        let need = k - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            cur.push(items[i]);
            let keep_going = go(items, i + 1, k, cur, visit);
            cur.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
    if k > items.len() {
        return true;
    }
    go(items, 0, k, &mut Vec::with_capacity(k), visit)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(u128::from(n - i)) / u128::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of ways to split `n` labelled items into unordered groups of
/// size `size`: `n! / (size!^(n/size) (n/size)!)`.
pub fn set_partitions(n: u64, size: u64) -> BigUint {
    assert!(
        size > 0 && n.is_multiple_of(size),
        "{n} items do not split into groups of {size}"
    );
    let groups = n / size;
    let mut denom = factorial(groups);
    let block = factorial(size);
    for _ in 0..groups {
        denom *= &block;
    }
    factorial(n) / denom
}

/// Number of perfect matchings on `n` (even) items: `(n-1)!!`.
pub fn perfect_matchings(n: u64) -> BigUint {
    assert!(n.is_multiple_of(2), "odd item count {n}");
    set_partitions(n, 2)
}
