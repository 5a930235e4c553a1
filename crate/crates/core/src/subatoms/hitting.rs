//! Subset ranking and an exact minimum hitting-set solver on at most 64 points.

use crate::exactnum::binomial_u64;
use num_traits::ToPrimitive;

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    binomial_u64(n, k).ok().and_then(|v| v.to_u128()).unwrap_or(u128::MAX)
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order of sorted element lists.
pub fn unrank_subset(n: u32, k: u32, mut rank: u128) -> u64 {
    let mut mask = 0u64;
    let mut remaining = k as u64;
    let mut x = 0u64;
    while remaining > 0 {
        let with_x = choose(n as u64 - x - 1, remaining - 1);
        if rank < with_x {
            mask |= 1 << x;
            remaining -= 1;
        } else {
            rank -= with_x;
        }
        x += 1;
    }
    mask
}

/// Inverse of [`unrank_subset`].
pub fn rank_subset(n: u32, mask: u64) -> u128 {
    let mut rank = 0u128;
    let mut remaining = mask.count_ones() as u64;
    for x in 0..n as u64 {
        if remaining == 0 {
            break;
        }
        if mask >> x & 1 == 1 {
            remaining -= 1;
        } else {
            rank += choose(n as u64 - x - 1, remaining - 1);
        }
    }
    rank
}

/// Size of a smallest `Y ⊆ points` meeting every set, searched up to `bound`.
///
/// Returns `None` if some set is empty (nothing hits it) or no hitting set of
/// size `<= bound` exists.
pub fn min_hitting_set(sets: &[u64], bound: u32) -> Option<(u32, u64)> {
    if sets.iter().any(|&s| s == 0) {
        return None;
    }
    if sets.is_empty() {
        return Some((0, 0));
    }
    for k in 1..=bound {
        if let Some(y) = search(sets, 0, k) {
            return Some((k, y));
        }
    }
    None
}

fn search(sets: &[u64], chosen: u64, budget: u32) -> Option<u64> {
    let Some(&unhit) = sets.iter().find(|&&s| s & chosen == 0) else {
        return Some(chosen);
    };
    if budget == 0 {
        return None;
    }
    // lower bound: greedily collect pairwise disjoint unhit sets
    let mut disjoint = 0u32;
    let mut used = 0u64;
    for &s in sets {
        if s & chosen == 0 && s & used == 0 {
            disjoint += 1;
            used |= s;
        }
    }
    if disjoint > budget {
        return None;
    }
    let mut rest = unhit;
    while rest != 0 {
        let p = rest.trailing_zeros();
        rest &= rest - 1;
        if let Some(y) = search(sets, chosen | 1 << p, budget - 1) {
            return Some(y);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_roundtrip() {
        for r in 0..120u128 {
            let m = unrank_subset(16, 2, r);
            assert_eq!(m.count_ones(), 2);
            assert_eq!(rank_subset(16, m), r);
        }
        assert_eq!(unrank_subset(4, 2, 0), 0b0011);
        assert_eq!(unrank_subset(4, 2, 5), 0b1100);
    }

    #[test]
    fn hitting_small_cases() {
        assert_eq!(min_hitting_set(&[0b011, 0b110], 3).map(|r| r.0), Some(1));
        assert_eq!(min_hitting_set(&[0b001, 0b010, 0b100], 3).map(|r| r.0), Some(3));
        assert_eq!(min_hitting_set(&[0b001, 0b010, 0b100], 2), None);
    }

    #[test]
    fn hitting_matches_brute_force() {
        let sets = [0b1011u64, 0b0110, 0b1100, 0b0101];
        let best = (0u64..16)
            .filter(|y| sets.iter().all(|s| s & y != 0))
            .map(|y| y.count_ones())
            .min()
            .unwrap();
        assert_eq!(min_hitting_set(&sets, 4).unwrap().0, best);
    }
}
