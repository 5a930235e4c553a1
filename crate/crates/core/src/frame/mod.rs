//! Frames: Sacks intervals, subatomic index sets and the parameters attached
//! to each level, plus the exact parameter cascade, finite condition
//! prefixes and their possibility sets.

mod cascade;
pub mod gen;
mod condition;
mod homogenize;
mod poss;
mod slalom;
pub mod toy;

pub use cascade::{cascade, cascade_with_budget, CascadeRow, CascadeTable, CascadeValue};
pub(crate) use condition::trunk_extended_to;
pub use condition::{
    curlywedge, glue_condition, half_condition, leq_check, prune_condition, validate_condition, wedge, Clause,
    ConditionPrefix, LeqReport, TrunkValue, ValidationReport,
};
pub use homogenize::{strong_bigness_homogenize, HomogenizeInput};
pub use poss::{
    decode_possibility, iota, iota_inverse, poss_included, poss_set, possibility_elements, Factor, FactorLabel,
    PossVariant, PossibilitySet,
};
pub use slalom::{slalom_block_ends, slalom_decode, slalom_encode, SlalomError};

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::exactnum::{BigNat, NumError};
use crate::interval::IndexInterval;
use crate::sacks::{maxwidth, SacksError};
use crate::subatoms::{FamilyRef, SubatomError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("level {0} lies beyond the frame")]
    BeyondFrame(u64),
    #[error("the prefix is too short: {0}")]
    InsufficientPrefix(String),
    #[error("invalid frame: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lemma check failed: {0}")]
    LemmaViolation(String),
    #[error("search space exceeds budget: {0}")]
    Budget(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Subatom(#[from] SubatomError),
    #[error(transparent)]
    Sacks(#[from] SacksError),
}

/// The four index types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexType {
    /// Sacks columns.
    Sk,
    /// The lim-inf type.
    Nm,
    /// Lim-sup type with hitting-set norms.
    Nn,
    /// Lim-sup type with counting norms.
    Cn,
}

impl IndexType {
    pub fn is_sacks(self) -> bool {
        self == IndexType::Sk
    }

    pub fn is_liminf(self) -> bool {
        self == IndexType::Nm
    }

    pub fn is_limsup(self) -> bool {
        matches!(self, IndexType::Nn | IndexType::Cn)
    }

    pub fn parse(s: &str) -> Option<IndexType> {
        match s {
            "sk" => Some(IndexType::Sk),
            "nm" => Some(IndexType::Nm),
            "nn" => Some(IndexType::Nn),
            "cn" => Some(IndexType::Cn),
            _ => None,
        }
    }
}

impl fmt::Display for IndexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexType::Sk => "sk",
            IndexType::Nm => "nm",
            IndexType::Nn => "nn",
            IndexType::Cn => "cn",
        })
    }
}

/// A typed index identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub id: u32,
    pub ty: IndexType,
}

impl Index {
    pub fn new(id: u32, ty: IndexType) -> Self {
        Index { id, ty }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.ty, self.id)
    }
}

/// A sublevel `(level, j)`; `j = -1` is the Sacks sublevel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sublevel {
    pub level: u64,
    pub j: i64,
}

impl Sublevel {
    pub fn sacks(level: u64) -> Self {
        Sublevel { level, j: -1 }
    }

    pub fn subatomic(level: u64, j: u32) -> Self {
        Sublevel { level, j: j as i64 }
    }

    pub fn is_sacks(&self) -> bool {
        self.j < 0
    }
}

impl Ord for Sublevel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.level, self.j).cmp(&(other.level, other.j))
    }
}

impl PartialOrd for Sublevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sublevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.j)
    }
}

/// The subatomic family used for each non-Sacks type at a level.
#[derive(Debug, Clone)]
pub struct TypeFamilies {
    pub nm: FamilyRef,
    pub nn: FamilyRef,
    pub cn: FamilyRef,
}

impl TypeFamilies {
    pub fn get(&self, ty: IndexType) -> Option<&FamilyRef> {
        match ty {
            IndexType::Sk => None,
            IndexType::Nm => Some(&self.nm),
            IndexType::Nn => Some(&self.nn),
            IndexType::Cn => Some(&self.cn),
        }
    }

    /// `M(u)`: the largest POSS among the three families.
    pub fn max_poss(&self) -> BigNat {
        [&self.nm, &self.nn, &self.cn].iter().map(|f| f.poss_count()).max().expect("three families")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMode {
    /// Parameters follow the inductive construction exactly.
    Exact,
    /// Small declared parameter tables.
    Toy,
}

/// Everything the frame fixes at one level.
#[derive(Debug, Clone)]
pub struct FrameLevel {
    /// `I_sk,level`.
    pub sacks: IndexInterval,
    /// `|J_level|`.
    pub j_count: u32,
    /// `B(level)`, the bigness of the Sacks sublevel.
    pub big_b: u64,
    /// Number of columns in the Ramsey function of the Sacks norm; `maxwidth(level)` in exact frames.
    pub sacks_arity: u64,
    /// Parameter of `mu` for atoms at this level; `maxwidth(level)` in exact frames.
    pub mu_param: u64,
    /// `maxposs(<level)`.
    pub maxposs_below: BigNat,
    /// `b(level, j)` for each `j`.
    pub sub_b: Vec<BigNat>,
    pub families: TypeFamilies,
}

/// One named requirement of the construction and whether the frame meets it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub name: &'static str,
    pub level: u64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct Frame {
    levels: Vec<FrameLevel>,
    mode: FrameMode,
}

impl Frame {
    pub fn new(levels: Vec<FrameLevel>, mode: FrameMode) -> Result<Self, FrameError> {
        if levels.is_empty() {
            return Err(FrameError::Invalid("no levels".into()));
        }
        let mut next = 0u64;
        for (l, lv) in levels.iter().enumerate() {
            if lv.sacks.start != next || lv.sacks.len == 0 {
                return Err(FrameError::Invalid(format!("Sacks interval at level {l} is not stacked")));
            }
            if lv.j_count == 0 || lv.sub_b.len() != lv.j_count as usize {
                return Err(FrameError::Invalid(format!("level {l} needs J > 0 and one b per sublevel")));
            }
            next = lv.sacks.end();
        }
        if next > 63 {
            return Err(FrameError::Invalid("Sacks intervals exceed 63 bits".into()));
        }
        Ok(Frame { levels, mode })
    }

    pub fn mode(&self) -> FrameMode {
        self.mode
    }

    /// Number of levels described.
    pub fn height(&self) -> u64 {
        self.levels.len() as u64
    }

    pub fn level(&self, l: u64) -> Result<&FrameLevel, FrameError> {
        self.levels.get(l as usize).ok_or(FrameError::BeyondFrame(l))
    }

    pub fn levels(&self) -> &[FrameLevel] {
        &self.levels
    }

    /// `I_sk,[lo,hi)`.
    pub fn sacks_interval(&self, lo: u64, hi: u64) -> Result<IndexInterval, FrameError> {
        if lo >= hi {
            return Err(FrameError::Domain(format!("empty level range [{lo}, {hi})")));
        }
        let a = self.level(lo)?.sacks.start;
        let b = self.level(hi - 1)?.sacks.end();
        Ok(IndexInterval::from_bounds(a, b))
    }

    pub fn family(&self, ty: IndexType, level: u64) -> Result<FamilyRef, FrameError> {
        self.level(level)?
            .families
            .get(ty)
            .cloned()
            .ok_or_else(|| FrameError::Domain("Sacks indices carry no subatomic family".into()))
    }

    /// `maxposs(<u)`, extending `maxposs(<level)` through the sublevels of the level.
    pub fn maxposs_before(&self, u: Sublevel) -> Result<BigNat, FrameError> {
        let lv = self.level(u.level)?;
        if u.is_sacks() {
            return Ok(lv.maxposs_below.clone());
        }
        let bits = lv.sacks.len as u64 * maxwidth(u.level);
        let mut mp = &lv.maxposs_below << bits as usize;
        let step = num_traits::pow(lv.families.max_poss(), maxwidth(u.level + 1) as usize);
        for _ in 0..u.j {
            mp *= &step;
        }
        Ok(mp)
    }

    /// `b(u)` for a subatomic sublevel.
    pub fn small_b(&self, u: Sublevel) -> Result<BigNat, FrameError> {
        if u.is_sacks() {
            return Err(FrameError::Domain("b is defined on subatomic sublevels".into()));
        }
        self.level(u.level)?
            .sub_b
            .get(u.j as usize)
            .cloned()
            .ok_or_else(|| FrameError::Domain(format!("sublevel {u} outside J")))
    }

    /// Subatomic sublevels `(l, j)` for levels in `[lo, hi)`, in order.
    pub fn subatomic_sublevels(&self, lo: u64, hi: u64) -> Result<Vec<Sublevel>, FrameError> {
        let mut out = Vec::new();
        for l in lo..hi {
            for j in 0..self.level(l)?.j_count {
                out.push(Sublevel::subatomic(l, j));
            }
        }
        Ok(out)
    }

    /// Each requirement of the construction, checked on the frame's tables.
    pub fn requirements(&self) -> Result<Vec<Requirement>, FrameError> {
        let mut out = Vec::new();
        let mut push = |name, level, holds| out.push(Requirement { name, level, holds });
        let mut prev_b: Option<BigNat> = None;
        for (l, lv) in self.levels.iter().enumerate() {
            let l = l as u64;
            push("sacks norm uses maxwidth columns", l, lv.sacks_arity == maxwidth(l));
            push("atom measure uses maxwidth", l, lv.mu_param == maxwidth(l));
            if l > 0 {
                let prev = &self.levels[l as usize - 1];
                push("B nondecreasing", l, prev.big_b <= lv.big_b);
                push("maxposs nondecreasing", l, prev.maxposs_below <= lv.maxposs_below);
                let carried = self.maxposs_before(Sublevel::subatomic(l - 1, prev.j_count - 1))?
                    * num_traits::pow(prev.families.max_poss(), maxwidth(l) as usize);
                push("maxposs follows the recursion", l, carried == lv.maxposs_below);
                let full = crate::sacks::nor_sacks_with_arity(lv.sacks.len as u64, lv.big_b, lv.sacks_arity.max(1))?;
                push("full Sacks cube has norm >= level", l, full >= l);
            } else {
                push("maxposs follows the recursion", l, lv.maxposs_below.is_one());
            }
            let target = 1u64.checked_shl((l * lv.maxposs_below.to_u64().unwrap_or(u64::MAX)).min(63) as u32);
            let mu_j = crate::atoms::mu(lv.mu_param, lv.j_count as u64);
            let big_enough = match target {
                Some(t) if l * lv.maxposs_below.to_u64().unwrap_or(u64::MAX) < 63 => {
                    mu_j.ge(&crate::exactnum::NormValue::from_int(t as i64))?
                }
                _ => false,
            };
            push("mu(J) >= 2^(level * maxposs)", l, big_enough);
            for (j, b) in lv.sub_b.iter().enumerate() {
                let u = Sublevel::subatomic(l, j as u32);
                push("b(u) >= 2 maxposs(<u)", l, *b >= self.maxposs_before(u)? * 2u32);
                if let Some(p) = &prev_b {
                    push("b strictly increasing", l, b > p);
                }
                prev_b = Some(b.clone());
            }
        }
        Ok(out)
    }
}
