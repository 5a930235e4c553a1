//! Sacks columns, splitting size, the Ramsey function `f`, the Sacks norm,
//! and finite measured trees.

mod measure;
mod ramsey;

pub use measure::{fat_nodes, FatNodeReport, FiniteTree, Node};
pub use ramsey::{homogenize_columns, homogenize_cube, is_constant_on, ramsey_f};

use std::fmt;

use thiserror::Error;

use crate::exactnum::{BigNat, SizeDescriptor, DEFAULT_BIT_BUDGET};
use crate::interval::IndexInterval;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SacksError {
    #[error("a Sacks column needs at least one branch")]
    Empty,
    #[error("intervals {0} and {1} are not properly stacked")]
    NotStacked(IndexInterval, IndexInterval),
    #[error("interval length {0} exceeds 63")]
    TooWide(u32),
    #[error("branch {0:#b} does not fit the interval")]
    BranchOutOfRange(u64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search space exceeds budget: {0}")]
    Budget(String),
}

/// The width `maxwidth(m)` used by the Sacks norm and the width norm; the identity.
pub fn maxwidth(m: u64) -> u64 {
    m
}

/// A nonempty set of functions `I -> 2`.
///
/// A branch is a bitmask whose bit `k` is the value at `I.start + k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SacksColumn {
    interval: IndexInterval,
    branches: Vec<u64>,
}

impl SacksColumn {
    pub fn new<B: IntoIterator<Item = u64>>(interval: IndexInterval, branches: B) -> Result<Self, SacksError> {
        if interval.len > 63 {
            return Err(SacksError::TooWide(interval.len));
        }
        let mut v: Vec<u64> = branches.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(SacksError::Empty);
        }
        if let Some(&b) = v.iter().find(|&&b| b >> interval.len != 0) {
            return Err(SacksError::BranchOutOfRange(b));
        }
        Ok(SacksColumn { interval, branches: v })
    }

    /// The full cube `2^I`.
    pub fn full(interval: IndexInterval) -> Result<Self, SacksError> {
        if interval.len > 24 {
            return Err(SacksError::Budget(format!("2^{} branches", interval.len)));
        }
        Self::new(interval, 0..1u64 << interval.len)
    }

    pub fn singleton(interval: IndexInterval, branch: u64) -> Result<Self, SacksError> {
        Self::new(interval, [branch])
    }

    pub fn interval(&self) -> IndexInterval {
        self.interval
    }

    pub fn branches(&self) -> &[u64] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, branch: u64) -> bool {
        self.branches.binary_search(&branch).is_ok()
    }

    /// `self <= other`: same interval and subset.
    pub fn le(&self, other: &SacksColumn) -> bool {
        self.interval == other.interval && self.branches.iter().all(|&b| other.contains(b))
    }

    pub fn splitting_size(&self) -> u32 {
        splitting_size_of(&self.branches, 0, self.interval.len)
    }

    /// Restriction of every branch to the first `k` coordinates.
    pub fn restrict_prefix(&self, k: u32) -> SacksColumn {
        let mask = low_mask(k);
        SacksColumn::new(IndexInterval::new(self.interval.start, k), self.branches.iter().map(|b| b & mask))
            .expect("nonempty")
    }

    /// Restriction of every branch to the coordinates from `k` on.
    pub fn restrict_suffix(&self, k: u32) -> SacksColumn {
        SacksColumn::new(
            IndexInterval::new(self.interval.start + k as u64, self.interval.len - k),
            self.branches.iter().map(|b| b >> k),
        )
        .expect("nonempty")
    }

    /// Keeps the branches satisfying `keep`.
    pub fn filter<F: Fn(u64) -> bool>(&self, keep: F) -> Result<SacksColumn, SacksError> {
        Self::new(self.interval, self.branches.iter().copied().filter(|&b| keep(b)))
    }

    /// `self ⊗ upper` for properly stacked intervals.
    pub fn product(&self, upper: &SacksColumn) -> Result<SacksColumn, SacksError> {
        let joined = self
            .interval
            .union_stacked(&upper.interval)
            .ok_or(SacksError::NotStacked(self.interval, upper.interval))?;
        if joined.len > 63 {
            return Err(SacksError::TooWide(joined.len));
        }
        let shift = self.interval.len;
        let mut out = Vec::with_capacity(self.len() * upper.len());
        for &lo in &self.branches {
            for &hi in &upper.branches {
                out.push(lo | hi << shift);
            }
        }
        Self::new(joined, out)
    }

    /// `nor_Sacks^{B,m}`.
    pub fn nor_sacks(&self, big_b: u64, m: u64) -> Result<u64, SacksError> {
        nor_sacks_of_split(self.splitting_size() as u64, big_b, m)
    }

    /// A sub-column with at most `2^|lead|` branches keeping splitting size
    /// `min(split, |lead|)`, where `lead` is the lower part of the interval.
    pub fn prune(&self, lead: IndexInterval) -> Result<SacksColumn, SacksError> {
        if lead.start != self.interval.start || lead.len > self.interval.len {
            return Err(SacksError::NotStacked(lead, self.interval));
        }
        let r = self.splitting_size().min(lead.len);
        let image = embed_binary_tree(&self.branches, self.interval.len, r);
        Self::new(self.interval, image)
    }
}

impl fmt::Debug for SacksColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SacksColumn({}; ", self.interval)?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            for k in 0..self.interval.len {
                write!(f, "{}", b >> k & 1)?;
            }
        }
        write!(f, ")")
    }
}

pub(crate) fn low_mask(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Splitting size of the restriction tree of `set` (branches agreeing below `level`).
///
/// `split(v)` is the maximum over children, plus one when both children attain it.
pub(crate) fn splitting_size_of(set: &[u64], level: u32, len: u32) -> u32 {
    let mut level = level;
    let mut set: Vec<u64> = set.to_vec();
    loop {
        if level >= len || set.len() <= 1 {
            return 0;
        }
        let (zero, one): (Vec<u64>, Vec<u64>) = set.iter().partition(|&&b| b >> level & 1 == 0);
        if zero.is_empty() {
            set = one;
        } else if one.is_empty() {
            set = zero;
        } else {
            let a = splitting_size_of(&zero, level + 1, len);
            let b = splitting_size_of(&one, level + 1, len);
            return if a == b { a + 1 } else { a.max(b) };
        }
        level += 1;
    }
}

/// Embeds `2^{<=r}` into the restriction tree of `set` and extends each
/// embedded leaf to a branch. Entry `code` of the result is the image of the
/// abstract leaf whose `i`-th split choice is bit `i` of `code`.
pub fn embed_binary_tree(set: &[u64], len: u32, r: u32) -> Vec<u64> {
    embed_from(set.to_vec(), 0, len, r)
}

fn embed_from(mut set: Vec<u64>, mut level: u32, len: u32, r: u32) -> Vec<u64> {
    if r == 0 {
        return vec![set[0]];
    }
    loop {
        assert!(level < len, "splitting size too small for embedding");
        let (zero, one): (Vec<u64>, Vec<u64>) = set.iter().partition(|&&b| b >> level & 1 == 0);
        let sz = if zero.is_empty() { None } else { Some(splitting_size_of(&zero, level + 1, len)) };
        let so = if one.is_empty() { None } else { Some(splitting_size_of(&one, level + 1, len)) };
        match (sz, so) {
            (Some(a), Some(b)) if a + 1 >= r && b + 1 >= r => {
                let e0 = embed_from(zero, level + 1, len, r - 1);
                let e1 = embed_from(one, level + 1, len, r - 1);
                return (0..1u64 << r)
                    .map(|code| if code & 1 == 0 { e0[(code >> 1) as usize] } else { e1[(code >> 1) as usize] })
                    .collect();
            }
            (Some(a), _) if a >= r => set = zero,
            _ => set = one,
        }
        level += 1;
    }
}

/// `F^B_m(n)`: `F(0) = 1`, `F(n+1) = f(maxwidth(m), F(n), B)`.
pub fn sacks_threshold(big_b: u64, m: u64, n: u64) -> Result<SizeDescriptor, SacksError> {
    if m == 0 {
        return Err(SacksError::Precondition("the Sacks norm needs m >= 1".into()));
    }
    let mut f = SizeDescriptor::exact(1u32);
    for _ in 0..n {
        let Some(prev) = f.as_exact().cloned() else {
            // F(n) already a tower: later values are towers too
            f = SizeDescriptor::pow2(&f, DEFAULT_BIT_BUDGET);
            continue;
        };
        f = ramsey_f(maxwidth(m), &prev, &BigNat::from(big_b));
    }
    Ok(f)
}

/// `max { n : F^B_m(n) <= split }`, or 0.
pub fn nor_sacks_of_split(split: u64, big_b: u64, m: u64) -> Result<u64, SacksError> {
    if m == 0 {
        return Err(SacksError::Precondition("the Sacks norm needs m >= 1".into()));
    }
    nor_sacks_with_arity(split, big_b, maxwidth(m))
}

/// The Sacks norm with `F(n+1) = f(arity, F(n), B)` for an explicit arity.
pub fn nor_sacks_with_arity(split: u64, big_b: u64, arity: u64) -> Result<u64, SacksError> {
    if arity == 0 {
        return Err(SacksError::Precondition("the Sacks norm needs arity >= 1".into()));
    }
    if big_b <= 1 {
        // one color: F is constantly 1 and every n qualifies
        return Err(SacksError::Precondition("the Sacks norm needs B >= 2".into()));
    }
    let mut n = 0u64;
    let mut f = BigNat::from(1u32);
    loop {
        let next = ramsey_f(arity, &f, &BigNat::from(big_b));
        if !next.le_u64(split) {
            return Ok(n);
        }
        f = next.as_exact().cloned().expect("bounded by split");
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(len: u32, bs: &[&str]) -> SacksColumn {
        let parse = |s: &str| s.chars().enumerate().map(|(k, c)| ((c == '1') as u64) << k).sum::<u64>();
        SacksColumn::new(IndexInterval::new(0, len), bs.iter().map(|s| parse(s))).unwrap()
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(SacksColumn::full(IndexInterval::new(0, 5)).unwrap().splitting_size(), 5);
        assert_eq!(col(3, &["010"]).splitting_size(), 0);
        assert_eq!(col(2, &["00", "01", "10"]).splitting_size(), 1);
    }

    #[test]
    fn nor_sacks_examples() {
        let f3 = SacksColumn::full(IndexInterval::new(0, 3)).unwrap();
        assert_eq!(f3.nor_sacks(2, 1).unwrap(), 1);
        let f4 = SacksColumn::full(IndexInterval::new(0, 4)).unwrap();
        assert_eq!(f4.nor_sacks(2, 1).unwrap(), 2);
        assert_eq!(col(2, &["01"]).nor_sacks(2, 1).unwrap(), 0);
        assert!(f3.nor_sacks(2, 0).is_err());
        let fs: Vec<_> = (0..4).map(|n| sacks_threshold(2, 1, n).unwrap()).collect();
        assert_eq!(fs, vec![1u64.into(), 2u64.into(), 4u64.into(), 8u64.into()]);
    }

    #[test]
    fn product_of_cubes() {
        let a = SacksColumn::full(IndexInterval::new(0, 2)).unwrap();
        let b = SacksColumn::full(IndexInterval::new(2, 3)).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.len(), 32);
        assert_eq!(p.splitting_size(), 5);
        assert!(b.product(&a).is_err());
        let s = SacksColumn::singleton(IndexInterval::new(2, 3), 5).unwrap();
        assert_eq!(a.product(&s).unwrap().splitting_size(), a.splitting_size());
    }

    #[test]
    fn prune_full_cube() {
        let s = SacksColumn::full(IndexInterval::new(0, 6)).unwrap();
        let p = s.prune(IndexInterval::new(0, 2)).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.splitting_size(), 2);
        assert!(p.le(&s));
    }

    #[test]
    fn embedding_images_are_distinct() {
        let s = col(4, &["0000", "1000", "0100", "1110", "0011", "1111"]);
        let r = s.splitting_size();
        let img = embed_binary_tree(s.branches(), 4, r);
        let mut d = img.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 1 << r);
        assert!(img.iter().all(|b| s.contains(*b)));
    }
}
