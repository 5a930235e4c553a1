//! Possibility sets of a condition prefix, indexed per index or per active
//! sublevel, and the correspondence between the two.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;

use super::condition::{ConditionPrefix, TrunkValue};
use super::{Frame, FrameError, Index, Sublevel};
use crate::exactnum::BigNat;
use crate::interval::IndexInterval;
use crate::sacks::low_mask;

/// Where a factor of a possibility set comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorLabel {
    /// The trunk of a Sacks index on one level.
    SacksTrunk { index: Index, level: u64, span: IndexInterval },
    /// A Sacks column starting at a `w` point.
    Column { index: Index, level: u64, span: IndexInterval },
    /// The trunk of a non-Sacks index at a subatomic sublevel.
    Trunk { index: Index, sublevel: Sublevel },
    /// A subatom of a creature.
    Subatom { index: Index, sublevel: Sublevel },
}

impl FactorLabel {
    pub fn index(&self) -> Index {
        match *self {
            FactorLabel::SacksTrunk { index, .. }
            | FactorLabel::Column { index, .. }
            | FactorLabel::Trunk { index, .. }
            | FactorLabel::Subatom { index, .. } => index,
        }
    }

    fn span(&self) -> Option<IndexInterval> {
        match *self {
            FactorLabel::SacksTrunk { span, .. } | FactorLabel::Column { span, .. } => Some(span),
            _ => None,
        }
    }
}

/// One coordinate of the product: Sacks choices are bit patterns relative to the span start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub label: FactorLabel,
    pub choices: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PossVariant {
    /// A product over indices, trunk included.
    PerIndex,
    /// A product over active sublevels only.
    PerSublevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilitySet {
    pub variant: PossVariant,
    pub below: Sublevel,
    pub factors: Vec<Factor>,
}

impl PossibilitySet {
    pub fn cardinality(&self) -> BigNat {
        self.factors.iter().fold(BigNat::one(), |acc, f| acc * f.choices.len())
    }

    pub fn contains(&self, elem: &[u64]) -> bool {
        elem.len() == self.factors.len()
            && self.factors.iter().zip(elem).all(|(f, c)| f.choices.binary_search(c).is_ok())
    }
}

pub(crate) fn sacks_start(frame: &Frame, level: u64) -> Result<u64, FrameError> {
    if level == 0 {
        Ok(0)
    } else {
        Ok(frame.level(level - 1)?.sacks.end())
    }
}

fn check_reach(p: &ConditionPrefix, u: Sublevel) -> Result<u64, FrameError> {
    let height = p.height().ok_or_else(|| FrameError::InsufficientPrefix("the empty condition has no possibilities".into()))?;
    if u.level < height || (u.level == height && u.is_sacks()) {
        Ok(height)
    } else {
        Err(FrameError::InsufficientPrefix(format!("sublevel {u} is not below the prefix height {height}")))
    }
}

/// The factors of `poss(p, xi, <u)`.
pub(crate) fn index_factors(frame: &Frame, p: &ConditionPrefix, xi: Index, u: Sublevel) -> Result<Vec<Factor>, FrameError> {
    let height = check_reach(p, u)?;
    let trk = p.trklgth(&xi).ok_or_else(|| FrameError::Domain(format!("{xi} is not in the support")))?;
    let trunk = p.trunk().get(&xi).ok_or_else(|| FrameError::Domain(format!("no trunk at {xi}")))?;
    let mut out = Vec::new();
    if xi.ty.is_sacks() {
        let w = p.w();
        let top = if u.is_sacks() && w.contains(&u.level) {
            u.level
        } else {
            (u.level + 1..trk).next().or_else(|| w.iter().copied().find(|&h| h > u.level)).ok_or_else(|| {
                FrameError::InsufficientPrefix(format!("no level above {} to close the Sacks part", u.level))
            })?
        };
        let TrunkValue::Sacks(bits) = trunk else {
            return Err(FrameError::Domain(format!("trunk at {xi} is not a Sacks trunk")));
        };
        for h in 0..top.min(trk) {
            let span = frame.level(h)?.sacks;
            let choice = bits >> span.start & low_mask(span.len);
            out.push(Factor { label: FactorLabel::SacksTrunk { index: xi, level: h, span }, choices: vec![choice] });
        }
        for (i, c) in p.creatures().iter().enumerate() {
            let h = w[i];
            if h >= trk && h < top {
                let col = c.column(&xi).ok_or_else(|| FrameError::Domain(format!("{xi} missing from the creature at {h}")))?;
                out.push(Factor {
                    label: FactorLabel::Column { index: xi, level: h, span: col.interval() },
                    choices: col.branches().to_vec(),
                });
            }
        }
    } else {
        let TrunkValue::Subatomic(vals) = trunk else {
            return Err(FrameError::Domain(format!("trunk at {xi} is not a subatomic trunk")));
        };
        let mut k = 0usize;
        for v in frame.subatomic_sublevels(0, height)? {
            if v >= u {
                break;
            }
            if v.level < trk {
                let a = *vals.get(k).ok_or_else(|| FrameError::Domain(format!("trunk at {xi} misses {v}")))?;
                out.push(Factor { label: FactorLabel::Trunk { index: xi, sublevel: v }, choices: vec![a] });
                k += 1;
            } else {
                let (_, c) = p.creature_at(v.level).expect("level below height");
                let x = c.subatom(&xi, v).ok_or_else(|| FrameError::Domain(format!("{xi} has no subatom at {v}")))?;
                out.push(Factor { label: FactorLabel::Subatom { index: xi, sublevel: v }, choices: x.poss().to_vec() });
            }
        }
    }
    Ok(out)
}

/// `poss(p, <u)` in either indexing.
pub fn poss_set(frame: &Frame, p: &ConditionPrefix, u: Sublevel, variant: PossVariant) -> Result<PossibilitySet, FrameError> {
    let height = check_reach(p, u)?;
    let mut factors = Vec::new();
    match variant {
        PossVariant::PerIndex => {
            for xi in p.supp() {
                factors.extend(index_factors(frame, p, xi, u)?);
            }
        }
        PossVariant::PerSublevel => {
            let w = p.w();
            for (i, c) in p.creatures().iter().enumerate() {
                let h = w[i];
                if Sublevel::sacks(h) < u {
                    for (xi, col) in c.columns() {
                        factors.push(Factor {
                            label: FactorLabel::Column { index: *xi, level: h, span: col.interval() },
                            choices: col.branches().to_vec(),
                        });
                    }
                }
                for v in frame.subatomic_sublevels(h, c.m_up().min(height))? {
                    if v >= u {
                        break;
                    }
                    if let Some(xi) = c.active_index(v) {
                        let x = c.subatom(&xi, v).expect("active subatom");
                        factors.push(Factor { label: FactorLabel::Subatom { index: xi, sublevel: v }, choices: x.poss().to_vec() });
                    }
                }
            }
        }
    }
    Ok(PossibilitySet { variant, below: u, factors })
}

/// Enumerates the elements of a possibility set, failing beyond `limit`.
pub fn possibility_elements(set: &PossibilitySet, limit: u64) -> Result<Vec<Vec<u64>>, FrameError> {
    let card = set.cardinality();
    if card > BigNat::from(limit) {
        return Err(FrameError::Budget(format!("{card} possibilities exceed the limit {limit}")));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; set.factors.len()];
    loop {
        out.push(set.factors.iter().zip(&idx).map(|(f, &i)| f.choices[i]).collect());
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < set.factors[k].choices.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Maps a per-index possibility to the per-sublevel one by dropping the
/// trunk and singleton subatoms.
pub fn iota(per_index: &PossibilitySet, per_sublevel: &PossibilitySet, elem: &[u64]) -> Result<Vec<u64>, FrameError> {
    if !per_index.contains(elem) {
        return Err(FrameError::Domain("not a possibility".into()));
    }
    let by_label: HashMap<FactorLabel, u64> = per_index.factors.iter().map(|f| f.label).zip(elem.iter().copied()).collect();
    per_sublevel
        .factors
        .iter()
        .map(|f| by_label.get(&f.label).copied().ok_or_else(|| FrameError::Domain(format!("no coordinate for {:?}", f.label))))
        .collect()
}

/// The inverse of [`iota`]: dropped coordinates are singletons.
pub fn iota_inverse(per_index: &PossibilitySet, per_sublevel: &PossibilitySet, elem: &[u64]) -> Result<Vec<u64>, FrameError> {
    if !per_sublevel.contains(elem) {
        return Err(FrameError::Domain("not a possibility".into()));
    }
    let by_label: HashMap<FactorLabel, u64> = per_sublevel.factors.iter().map(|f| f.label).zip(elem.iter().copied()).collect();
    per_index
        .factors
        .iter()
        .map(|f| match by_label.get(&f.label) {
            Some(&c) => Ok(c),
            None if f.choices.len() == 1 => Ok(f.choices[0]),
            None => Err(FrameError::Domain(format!("coordinate {:?} has a choice but is not active", f.label))),
        })
        .collect()
}

/// Per-index values of a per-index possibility: Sacks bits are absolute,
/// subatomic values are listed by sublevel from `(0,0)`.
pub fn decode_possibility(set: &PossibilitySet, elem: &[u64]) -> Result<BTreeMap<Index, TrunkValue>, FrameError> {
    if set.variant != PossVariant::PerIndex || !set.contains(elem) {
        return Err(FrameError::Domain("not a per-index possibility".into()));
    }
    let mut out: BTreeMap<Index, TrunkValue> = BTreeMap::new();
    for (f, &c) in set.factors.iter().zip(elem) {
        let ix = f.label.index();
        let entry = out.entry(ix).or_insert_with(|| {
            if ix.ty.is_sacks() {
                TrunkValue::Sacks(0)
            } else {
                TrunkValue::Subatomic(Vec::new())
            }
        });
        match (entry, f.label.span()) {
            (TrunkValue::Sacks(bits), Some(span)) => *bits |= c << span.start,
            (TrunkValue::Subatomic(v), None) => v.push(c),
            _ => unreachable!("factor kind matches index type"),
        }
    }
    Ok(out)
}

const PROJECTION_LIMIT: usize = 1 << 20;

/// Whether the per-index set `a` is contained in `b`, factor by factor.
///
/// Sacks coordinates may be cut differently in the two sets; each factor of
/// `b` is compared against the projection of `a` onto its span.
pub fn poss_included(a: &PossibilitySet, b: &PossibilitySet) -> Result<bool, FrameError> {
    if a.variant != PossVariant::PerIndex || b.variant != PossVariant::PerIndex {
        return Err(FrameError::Domain("inclusion compares per-index sets".into()));
    }
    let group = |s: &PossibilitySet| {
        let mut m: BTreeMap<Index, Vec<Factor>> = BTreeMap::new();
        for f in &s.factors {
            m.entry(f.label.index()).or_default().push(f.clone());
        }
        m
    };
    let (ga, gb) = (group(a), group(b));
    if ga.keys().ne(gb.keys()) {
        return Ok(false);
    }
    for (ix, fa) in &ga {
        let fb = &gb[ix];
        if !ix.ty.is_sacks() {
            if fa.len() != fb.len() {
                return Ok(false);
            }
            for (x, y) in fa.iter().zip(fb) {
                let (FactorLabel::Trunk { sublevel: s1, .. } | FactorLabel::Subatom { sublevel: s1, .. }) = x.label else { unreachable!() };
                let (FactorLabel::Trunk { sublevel: s2, .. } | FactorLabel::Subatom { sublevel: s2, .. }) = y.label else { unreachable!() };
                if s1 != s2 || x.choices.iter().any(|c| y.choices.binary_search(c).is_err()) {
                    return Ok(false);
                }
            }
            continue;
        }
        let end = |fs: &[Factor]| fs.iter().filter_map(|f| f.label.span()).map(|s| s.end()).max().unwrap_or(0);
        if end(fa) != end(fb) {
            return Ok(false);
        }
        for beta in fb {
            let bs = beta.label.span().expect("Sacks factor");
            let mut proj: Vec<u64> = vec![0];
            for alpha in fa {
                let s = alpha.label.span().expect("Sacks factor");
                let lo = s.start.max(bs.start);
                let hi = s.end().min(bs.end());
                if lo >= hi {
                    continue;
                }
                let mut part: Vec<u64> = alpha
                    .choices
                    .iter()
                    .map(|c| (c >> (lo - s.start) & low_mask((hi - lo) as u32)) << (lo - bs.start))
                    .collect();
                part.sort_unstable();
                part.dedup();
                if proj.len() * part.len() > PROJECTION_LIMIT {
                    return Err(FrameError::Budget("projection of a Sacks part is too large".into()));
                }
                proj = proj.iter().flat_map(|x| part.iter().map(move |y| x | y)).collect();
            }
            if proj.iter().any(|x| beta.choices.binary_search(x).is_err()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
