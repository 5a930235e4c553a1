//! Finite trees with a measure proxy, and the fat-node count.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{low_mask, splitting_size_of, SacksError};
use crate::exactnum::Rational;

/// A node of `2^{<omega}`: the first `len` bits of `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub len: u32,
    pub bits: u64,
}

/// A tree truncated at `depth`, given by its nonempty set of nodes at that depth.
///
/// The measure of `[T]` is approximated by the leaf density at `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    depth: u32,
    leaves: Vec<u64>,
}

impl FiniteTree {
    pub fn new<L: IntoIterator<Item = u64>>(depth: u32, leaves: L) -> Result<Self, SacksError> {
        if depth > 63 {
            return Err(SacksError::TooWide(depth));
        }
        let mut v: Vec<u64> = leaves.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(SacksError::Empty);
        }
        if let Some(&b) = v.iter().find(|&&b| b >> depth != 0) {
            return Err(SacksError::BranchOutOfRange(b));
        }
        Ok(FiniteTree { depth, leaves: v })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaves(&self) -> &[u64] {
        &self.leaves
    }

    pub fn contains(&self, node: Node) -> bool {
        node.len <= self.depth && self.leaves.iter().any(|&l| l & low_mask(node.len) == node.bits)
    }

    /// The nodes of the tree at level `m`.
    pub fn level(&self, m: u32) -> Vec<u64> {
        let mut v: Vec<u64> = self.leaves.iter().map(|&l| l & low_mask(m)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn leaves_below(&self, node: Node) -> u64 {
        let mask = low_mask(node.len);
        self.leaves.iter().filter(|&&l| l & mask == node.bits).count() as u64
    }

    /// Leaf density of the whole tree.
    pub fn measure(&self) -> Rational {
        ratio(self.leaves.len() as u64, 1u64 << self.depth)
    }

    /// Leaf density inside the cone of `node`.
    pub fn relative_measure(&self, node: Node) -> Rational {
        ratio(self.leaves_below(node), 1u64 << (self.depth - node.len))
    }

    pub fn splitting_size(&self) -> u32 {
        splitting_size_of(&self.leaves, 0, self.depth)
    }
}

fn ratio(a: u64, b: u64) -> Rational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatNodeReport {
    pub level: u32,
    pub fat: Vec<u64>,
    pub level_size: u64,
    pub measure: Rational,
    /// `|T ∩ 2^m| 2^-m - measure eps^2 <= measure`.
    pub hypothesis: bool,
    /// `fat >= 2^m measure (1 - eps)`.
    pub bound_holds: bool,
    /// The stronger `fat >= (1 - eps) |T ∩ 2^m|`.
    pub level_bound_holds: bool,
}

impl FatNodeReport {
    /// The bound holds or the hypothesis fails.
    pub fn consistent(&self) -> bool {
        !self.hypothesis || self.bound_holds
    }
}

/// Nodes `s` at level `m` whose cone has relative measure at least `1 - eps`.
pub fn fat_nodes(tree: &FiniteTree, m: u32, eps: &Rational) -> Result<FatNodeReport, SacksError> {
    if m > tree.depth {
        return Err(SacksError::Precondition(format!("level {m} exceeds depth {}", tree.depth)));
    }
    let one = Rational::from_integer(1.into());
    let level = tree.level(m);
    let threshold = &one - eps;
    let fat: Vec<u64> = level
        .iter()
        .copied()
        .filter(|&bits| tree.relative_measure(Node { len: m, bits }) >= threshold)
        .collect();
    let mu = tree.measure();
    let two_m = Rational::from_integer(BigInt::from(1u64 << m));
    let size = Rational::from_integer(BigInt::from(level.len()));
    let l = Rational::from_integer(BigInt::from(fat.len()));
    let hypothesis = &size / &two_m - &mu * eps * eps <= mu;
    let bound_holds = l >= &two_m * &mu * &threshold;
    let level_bound_holds = l >= &threshold * &size;
    Ok(FatNodeReport {
        level: m,
        level_size: level.len() as u64,
        fat,
        measure: mu,
        hypothesis,
        bound_holds,
        level_bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        let t = FiniteTree::new(3, [0b000, 0b100, 0b001]).unwrap();
        assert_eq!(t.measure(), ratio(3, 8));
        assert_eq!(t.relative_measure(Node { len: 1, bits: 0 }), ratio(2, 4));
        assert_eq!(t.level(1), vec![0, 1]);
        assert!(t.contains(Node { len: 2, bits: 0b01 }));
        assert!(!t.contains(Node { len: 2, bits: 0b10 }));
    }

    #[test]
    fn martingale_average() {
        let t = FiniteTree::new(4, [0, 3, 5, 6, 9, 15]).unwrap();
        for len in 0..4 {
            for bits in 0..1u64 << len {
                let p = t.relative_measure(Node { len, bits });
                let a = t.relative_measure(Node { len: len + 1, bits });
                let b = t.relative_measure(Node { len: len + 1, bits: bits | 1 << len });
                assert_eq!(p * ratio(2, 1), a + b);
            }
        }
    }

    #[test]
    fn full_tree_all_fat() {
        let t = FiniteTree::new(4, 0..16).unwrap();
        let r = fat_nodes(&t, 2, &ratio(1, 4)).unwrap();
        assert_eq!(r.fat.len(), 4);
        assert!(r.hypothesis && r.bound_holds && r.level_bound_holds);
    }
}
