//! Finite integer intervals `[start, start + len)`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexInterval {
    pub start: u64,
    pub len: u32,
}

impl IndexInterval {
    pub fn new(start: u64, len: u32) -> Self {
        IndexInterval { start, len }
    }

    /// Interval `[lo, hi)`.
    pub fn from_bounds(lo: u64, hi: u64) -> Self {
        assert!(hi >= lo, "empty interval bounds reversed");
        IndexInterval { start: lo, len: (hi - lo) as u32 }
    }

    pub fn min(&self) -> u64 {
        self.start
    }

    /// Largest element; for an empty interval this is `start - 1` saturated.
    pub fn max(&self) -> u64 {
        (self.start + self.len as u64).saturating_sub(1)
    }

    /// One past the largest element.
    pub fn end(&self) -> u64 {
        self.start + self.len as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: u64) -> bool {
        i >= self.start && i < self.end()
    }

    /// True when `other` starts right after `self` ends.
    pub fn stacked_below(&self, other: &IndexInterval) -> bool {
        self.end() == other.start
    }

    pub fn union_stacked(&self, other: &IndexInterval) -> Option<IndexInterval> {
        self.stacked_below(other).then(|| IndexInterval::new(self.start, self.len + other.len))
    }
}

impl fmt::Display for IndexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end())
    }
}
