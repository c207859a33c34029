//! Permutation tables shared by every allocation setting.

use std::sync::OnceLock;

use itertools::Itertools;
use smallvec::SmallVec;

/// Largest number of individuals supported by the fixed-size encodings.
pub const MAX_N: usize = 8;

/// A strict ranking of indices, best first.
pub type Ranking = SmallVec<[u8; MAX_N]>;

static TABLES: [OnceLock<Vec<Ranking>>; MAX_N + 1] = [const { OnceLock::new() }; MAX_N + 1];

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> &'static [Ranking] {
    assert!(n <= MAX_N, "permutation table requested for n = {n}");
    TABLES[n].get_or_init(|| {
        (0..n as u8)
            .permutations(n)
            .map(|p| p.into_iter().collect())
            .collect()
    })
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Lexicographic index of a permutation of `0..p.len()` (its Lehmer code).
pub fn rank(p: &[u8]) -> usize {
    let n = p.len();
    let mut idx = 0usize;
    for i in 0..n {
        let smaller_later = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        idx = idx * (n - i) + smaller_later;
    }
    idx
}

/// `pos[x]` = position of `x` in `p`.
pub fn positions(p: &[u8]) -> [u8; MAX_N] {
    let mut pos = [0u8; MAX_N];
    for (k, &x) in p.iter().enumerate() {
        pos[x as usize] = k as u8;
    }
    pos
}

/// Whether `p` is a permutation of `0..p.len()`.
pub fn is_permutation(p: &[u8]) -> bool {
    let mut seen = 0u32;
    for &x in p {
        if x as usize >= p.len() || seen & (1 << x) != 0 {
            return false;
        }
        seen |= 1 << x;
    }
    true
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_factorial_size_and_lex_order() {
        for n in 0..=6 {
            let t = permutations(n);
            assert_eq!(t.len() as u128, factorial(n));
            assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rank_inverts_table_order() {
        for n in 1..=5 {
            for (i, p) in permutations(n).iter().enumerate() {
                assert_eq!(rank(p), i);
            }
        }
    }

    #[test]
    fn positions_invert_permutation() {
        let p = [2u8, 0, 3, 1];
        let pos = positions(&p);
        for (k, &x) in p.iter().enumerate() {
            assert_eq!(pos[x as usize] as usize, k);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(10, 3), 120);
    }

    #[test]
    fn permutation_check() {
        assert!(is_permutation(&[1, 0, 2]));
        assert!(!is_permutation(&[1, 1, 2]));
        assert!(!is_permutation(&[0, 3, 1]));
    }
}
