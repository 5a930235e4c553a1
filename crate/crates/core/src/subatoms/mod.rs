//! Subatomic families: finite posets of possibility sets with a norm.
//!
//! For the concrete families a subatom is determined by its possibility set
//! and the order is inclusion, so [`Subatom`] stores only the set.

mod bigness;
mod families;
mod hitting;

pub use bigness::{check_bigness, check_family_axioms, BignessMode, BignessVerdict, Counterexample};
pub use families::{
    cn_minimal_len, nm_minimal_len, nn_minimal_len, rescale_norm, CnFamily, CountingFamily, NmFamily,
    NnFamily, RemoveAvoid, Rescaled,
};
pub use hitting::{min_hitting_set, unrank_subset, rank_subset};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::counting::CountingError;
use crate::exactnum::{BigNat, NormValue, NumError, SizeDescriptor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubatomError {
    #[error("a subatom needs a nonempty possibility set")]
    Empty,
    #[error("possibility {0} lies outside POSS")]
    OutsideUniverse(u64),
    #[error("{kind} family on |I| = {len} with b = {b} misses nor(POSS) > b; minimal |I| is {min_len}")]
    Requirement { kind: FamilyKind, len: u32, b: u64, min_len: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("removing the avoided points leaves no possibility")]
    EmptySubatom,
    #[error("lemma check failed: {0}")]
    LemmaViolation(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Counting(#[from] CountingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    /// `POSS = 2^I`, norm `log_b |x| / b`.
    Nm,
    /// Large subsets of `2^I`, hitting-set norm.
    Nn,
    /// Large subsets of `2^I`, `lognor` counting norm.
    Cn,
    /// A counting norm `log_base |x| / divisor` on an abstract POSS.
    Counting,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Nm => "nm",
            FamilyKind::Nn => "nn",
            FamilyKind::Cn => "cn",
            FamilyKind::Counting => "counting",
        })
    }
}

/// A nonempty, sorted set of possibility indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subatom(Vec<u64>);

impl Subatom {
    pub fn new<I: IntoIterator<Item = u64>>(poss: I) -> Result<Self, SubatomError> {
        let mut v: Vec<u64> = poss.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(SubatomError::Empty);
        }
        Ok(Subatom(v))
    }

    pub fn singleton(a: u64) -> Self {
        Subatom(vec![a])
    }

    /// All of `0..n`.
    pub fn full(n: u64) -> Self {
        assert!(n > 0, "empty POSS");
        Subatom((0..n).collect())
    }

    /// Subset of `0..n` given by a bitmask (`n <= 64`).
    pub fn from_mask(mask: u64) -> Result<Self, SubatomError> {
        Self::new((0..64).filter(|i| mask >> i & 1 == 1))
    }

    pub fn poss(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, a: u64) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    /// `self <= other`, i.e. `poss(self) ⊆ poss(other)`.
    pub fn le(&self, other: &Subatom) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    /// The stronger subatom keeping possibilities satisfying `keep`.
    pub fn filter<F: Fn(u64) -> bool>(&self, keep: F) -> Result<Subatom, SubatomError> {
        Subatom::new(self.0.iter().copied().filter(|&a| keep(a)))
    }

    pub fn intersect(&self, other: &Subatom) -> Result<Subatom, SubatomError> {
        self.filter(|a| other.contains(a))
    }

    pub fn union(&self, other: &Subatom) -> Subatom {
        Subatom::new(self.0.iter().chain(other.0.iter()).copied()).expect("nonempty")
    }

    pub fn first(&self) -> u64 {
        self.0[0]
    }
}

impl fmt::Debug for Subatom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A subatomic family living on a finite POSS.
pub trait SubatomicFamily: Send + Sync + fmt::Debug {
    fn kind(&self) -> FamilyKind;

    /// The bigness parameter the family was built for.
    fn b(&self) -> u64;

    /// `|POSS|`.
    fn poss_count(&self) -> BigNat;

    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError>;

    /// `H'` for this family.
    fn h_prime(&self) -> SizeDescriptor;

    /// Whether `nor(x) > b` holds for the full subatom.
    fn requirement_met(&self) -> bool;

    /// Whether the norm is monotone under inclusion.
    fn monotone(&self) -> bool {
        true
    }

    /// Whether the norm depends only on `|poss(x)|`.
    fn counting(&self) -> bool {
        false
    }

    /// `|POSS|` as a machine integer when enumerable.
    fn poss_count_u64(&self) -> Option<u64> {
        u64::try_from(self.poss_count()).ok()
    }

    /// Whether `x` is a member: nonempty and inside POSS.
    fn contains(&self, x: &Subatom) -> bool {
        match self.poss_count_u64() {
            Some(n) => x.poss().iter().all(|&a| a < n),
            None => true,
        }
    }

    /// The subatom with possibility set POSS.
    fn full(&self) -> Result<Subatom, SubatomError> {
        match self.poss_count_u64() {
            Some(n) if n <= 1 << 24 => Ok(Subatom::full(n)),
            _ => Err(SubatomError::TooLarge(format!("|POSS| = {}", self.poss_count()))),
        }
    }
}

pub type FamilyRef = Arc<dyn SubatomicFamily>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subatom_order_is_inclusion() {
        let x = Subatom::new([1, 2, 3]).unwrap();
        let y = Subatom::new([3, 1]).unwrap();
        assert!(y.le(&x));
        assert!(!x.le(&y));
        assert!(Subatom::new(Vec::<u64>::new()).is_err());
        assert_eq!(x.filter(|a| a > 1).unwrap(), Subatom::new([2, 3]).unwrap());
    }
}
