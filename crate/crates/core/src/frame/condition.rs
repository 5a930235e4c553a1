//! Finite prefixes of conditions: validation, trunk extension, the order,
//! pruning and gluing along a subset of `w`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;


use super::poss::{decode_possibility, index_factors, poss_included, poss_set, sacks_start, PossVariant};
use super::{Frame, FrameError, Index, Sublevel};
use crate::compound::{compound_norm, glue, half, CompoundCreature};
use crate::exactnum::{NormValue, Rational};
use crate::sacks::{low_mask, maxwidth, nor_sacks_with_arity, SacksColumn};
use crate::subatoms::Subatom;

/// The trunk at one index. Sacks bits are absolute positions below the
/// trunk length; subatomic values are listed by sublevel from `(0,0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrunkValue {
    Sacks(u64),
    Subatomic(Vec<u64>),
}

/// A condition cut off at its last `w` point.
///
/// Creature `i` lives on `[w[i], w[i+1])`. Indices may appear in the trunk
/// without entering any creature below the height; their trunk reaches the height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionPrefix {
    w: Vec<u64>,
    creatures: Vec<CompoundCreature>,
    trunk: BTreeMap<Index, TrunkValue>,
    /// Required norm per creature, standing in for the norms tending to infinity.
    schedule: Vec<Rational>,
}

impl ConditionPrefix {
    pub fn new(
        w: Vec<u64>,
        creatures: Vec<CompoundCreature>,
        trunk: BTreeMap<Index, TrunkValue>,
        schedule: Vec<Rational>,
    ) -> Result<Self, FrameError> {
        if w.len() != creatures.len() + 1 || creatures.is_empty() {
            return Err(FrameError::Invalid("need at least one creature and one more w point than creatures".into()));
        }
        for (i, c) in creatures.iter().enumerate() {
            if c.m_dn() != w[i] || c.m_up() != w[i + 1] {
                return Err(FrameError::Invalid(format!(
                    "creature {i} lives on [{}, {}) instead of [{}, {})",
                    c.m_dn(),
                    c.m_up(),
                    w[i],
                    w[i + 1]
                )));
            }
        }
        if !schedule.is_empty() && schedule.len() != creatures.len() {
            return Err(FrameError::Invalid("the norm schedule needs one entry per creature".into()));
        }
        Ok(ConditionPrefix { w, creatures, trunk, schedule })
    }

    /// The weakest condition.
    pub fn empty() -> Self {
        ConditionPrefix { w: Vec::new(), creatures: Vec::new(), trunk: BTreeMap::new(), schedule: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.creatures.is_empty()
    }

    pub fn w(&self) -> &[u64] {
        &self.w
    }

    pub fn creatures(&self) -> &[CompoundCreature] {
        &self.creatures
    }

    pub fn trunk(&self) -> &BTreeMap<Index, TrunkValue> {
        &self.trunk
    }

    pub fn schedule(&self) -> &[Rational] {
        &self.schedule
    }

    pub fn height(&self) -> Option<u64> {
        self.w.last().copied()
    }

    pub fn supp(&self) -> BTreeSet<Index> {
        let mut s: BTreeSet<Index> = self.trunk.keys().copied().collect();
        for c in &self.creatures {
            s.extend(c.supp().iter().copied());
        }
        s
    }

    /// The creature covering `level` and its position.
    pub fn creature_at(&self, level: u64) -> Option<(usize, &CompoundCreature)> {
        self.creatures.iter().enumerate().find(|(_, c)| c.m_dn() <= level && level < c.m_up())
    }

    /// The first `w` point whose creature contains `xi`; the height for trunk-only indices.
    pub fn trklgth(&self, xi: &Index) -> Option<u64> {
        match self.creatures.iter().find(|c| c.supp().contains(xi)) {
            Some(c) => Some(c.m_dn()),
            None if self.trunk.contains_key(xi) => self.height(),
            None => None,
        }
    }

    pub fn trunk_lengths(&self) -> BTreeMap<Index, u64> {
        self.supp().into_iter().filter_map(|xi| self.trklgth(&xi).map(|t| (xi, t))).collect()
    }

    pub fn halving_at(&self, level: u64) -> Option<&Rational> {
        self.creature_at(level).and_then(|(_, c)| c.halving(level))
    }

    /// Raises the halving parameter at `level`.
    pub fn with_halving(&self, level: u64, d: Rational) -> Result<Self, FrameError> {
        let (i, c) = self.creature_at(level).ok_or(FrameError::BeyondFrame(level))?;
        let mut out = self.clone();
        out.creatures[i] = crate::compound::with_halving(c, level, d)?;
        Ok(out)
    }

    fn replace_creatures(&self, creatures: Vec<CompoundCreature>) -> Self {
        ConditionPrefix { creatures, ..self.clone() }
    }
}

impl fmt::Display for ConditionPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "empty condition");
        }
        write!(f, "w = {:?}; supports", self.w)?;
        for c in &self.creatures {
            write!(f, " [{}]", c.supp().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))?;
        }
        Ok(())
    }
}

/// One checked clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

impl Clause {
    fn new(name: &'static str, failure: Option<String>) -> Self {
        Clause { name, holds: failure.is_none(), detail: failure.unwrap_or_default() }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.holds { "ok  " } else { "FAIL" }, self.name)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub clauses: Vec<Clause>,
    pub trunk_lengths: BTreeMap<Index, u64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

fn first_failure<I: IntoIterator<Item = Option<String>>>(it: I) -> Option<String> {
    it.into_iter().flatten().next()
}

fn trunk_domain_failure(frame: &Frame, p: &ConditionPrefix, xi: &Index) -> Result<Option<String>, FrameError> {
    let trk = p.trklgth(xi).expect("in support");
    let Some(t) = p.trunk.get(xi) else {
        return Ok(Some(format!("no trunk at {xi}")));
    };
    Ok(match t {
        TrunkValue::Sacks(bits) if xi.ty.is_sacks() => {
            let top = sacks_start(frame, trk)?;
            (top < 64 && bits >> top != 0).then(|| format!("Sacks trunk at {xi} reaches beyond level {trk}"))
        }
        TrunkValue::Subatomic(vals) if !xi.ty.is_sacks() => {
            let subs = frame.subatomic_sublevels(0, trk)?;
            if subs.len() != vals.len() {
                Some(format!("trunk at {xi} has {} values for {} sublevels below {trk}", vals.len(), subs.len()))
            } else {
                let mut bad = None;
                for (v, a) in subs.iter().zip(vals) {
                    let fam = frame.family(xi.ty, v.level)?;
                    if !fam.contains(&Subatom::singleton(*a)) {
                        bad = Some(format!("trunk value {a} at {xi}, {v} lies outside POSS"));
                        break;
                    }
                }
                bad
            }
        }
        _ => Some(format!("trunk at {xi} has the wrong kind")),
    })
}

/// Checks the structural clauses of a condition on the prefix.
pub fn validate_condition(frame: &Frame, p: &ConditionPrefix) -> Result<ValidationReport, FrameError> {
    let mut clauses = Vec::new();
    if p.is_empty() {
        clauses.push(Clause::new("empty condition", None));
        return Ok(ValidationReport { clauses, trunk_lengths: BTreeMap::new() });
    }
    let height = p.height().expect("nonempty");
    clauses.push(Clause::new(
        "height within the frame",
        (height > frame.height()).then(|| format!("height {height} exceeds {} frame levels", frame.height())),
    ));
    clauses.push(Clause::new(
        "support monotone along w",
        first_failure(p.creatures.windows(2).map(|c| {
            (!c[0].supp().is_subset(c[1].supp())).then(|| format!("support shrinks from {} to {}", c[0].m_dn(), c[1].m_dn()))
        })),
    ));
    let mut domain = None;
    for xi in p.supp() {
        if domain.is_none() {
            domain = trunk_domain_failure(frame, p, &xi)?;
        }
    }
    clauses.push(Clause::new("trunk domain below each trunk length", domain));
    let schedule = if p.schedule.is_empty() {
        None
    } else if p.schedule.windows(2).any(|s| s[0] > s[1]) {
        Some("schedule decreases".to_string())
    } else {
        let mut bad = None;
        for (c, target) in p.creatures.iter().zip(&p.schedule) {
            let n = compound_norm(frame, c)?.total;
            if !n.ge_rational(target)? {
                bad = Some(format!("norm {n} at {} is below the scheduled {target}", c.m_dn()));
                break;
            }
        }
        bad
    };
    clauses.push(Clause::new("norms meet the schedule", schedule));
    Ok(ValidationReport { clauses, trunk_lengths: p.trunk_lengths() })
}

#[derive(Debug, Clone)]
pub struct LeqReport {
    pub clauses: Vec<Clause>,
}

impl LeqReport {
    pub fn holds(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

/// Evaluates the six clauses of `q <= p` on prefixes of equal height.
pub fn leq_check(frame: &Frame, q: &ConditionPrefix, p: &ConditionPrefix) -> Result<LeqReport, FrameError> {
    let names = [
        "w(q) inside w(p)",
        "support trace",
        "trunk compatible",
        "subatoms stronger",
        "Sacks columns stronger",
        "halving does not decrease",
    ];
    if p.is_empty() {
        return Ok(LeqReport { clauses: names.iter().map(|n| Clause::new(n, None)).collect() });
    }
    if q.is_empty() {
        let mut clauses = vec![Clause::new(names[0], Some("the empty condition is weakest".into()))];
        clauses.extend(names[1..].iter().map(|n| Clause::new(n, None)));
        return Ok(LeqReport { clauses });
    }
    if q.height() != p.height() {
        return Err(FrameError::InsufficientPrefix(format!(
            "heights {} and {} differ",
            q.height().expect("nonempty"),
            p.height().expect("nonempty")
        )));
    }
    let height = p.height().expect("nonempty");
    let supp_p = p.supp();
    let mut clauses = Vec::with_capacity(6);

    clauses.push(Clause::new(names[0], q.w.iter().find(|h| !p.w.contains(h)).map(|h| format!("{h} is not in w(p)"))));
    let c1 = clauses[0].holds;

    let trace = first_failure(q.creatures.iter().map(|qc| {
        let h = qc.m_dn();
        let Some((_, pc)) = p.creature_at(h) else { return Some(format!("p has no creature at {h}")) };
        let lhs: BTreeSet<Index> = supp_p.intersection(qc.supp()).copied().collect();
        (!c1 || &lhs != pc.supp()).then(|| format!("supp(p) and supp(q({h})) meet in {lhs:?}, not supp(p({h}))"))
    }))
    .or_else(|| {
        supp_p
            .iter()
            .find(|xi| q.trklgth(xi).is_none())
            .map(|xi| format!("{xi} disappeared from q"))
    });
    clauses.push(Clause::new(names[1], trace));
    if !clauses[1].holds {
        clauses.extend(names[2..].iter().map(|n| Clause::new(n, Some("skipped after the support trace failed".into()))));
        return Ok(LeqReport { clauses });
    }

    let mut trunk = None;
    for xi in &supp_p {
        let t = q.trklgth(xi).expect("checked");
        let u = Sublevel::sacks(t);
        let a = super::PossibilitySet { variant: PossVariant::PerIndex, below: u, factors: index_factors(frame, q, *xi, u)? };
        let b = super::PossibilitySet { variant: PossVariant::PerIndex, below: u, factors: index_factors(frame, p, *xi, u)? };
        if !poss_included(&a, &b)? {
            trunk = Some(format!("trunk of q at {xi} below {t} is not a possibility of p"));
            break;
        }
    }
    clauses.push(Clause::new(names[2], trunk));

    let mut sub = None;
    let mut cols = None;
    for xi in &supp_p {
        let t = q.trklgth(xi).expect("checked");
        if xi.ty.is_sacks() {
            for (i, qc) in q.creatures.iter().enumerate() {
                let h = q.w[i];
                if h < t || cols.is_some() {
                    continue;
                }
                let mut prod: Option<SacksColumn> = None;
                for (k, pc) in p.creatures.iter().enumerate() {
                    if p.w[k] >= h && p.w[k] < q.w[i + 1] {
                        let c = pc.column(xi).expect("monotone support");
                        prod = Some(match prod {
                            None => c.clone(),
                            Some(acc) => acc.product(c)?,
                        });
                    }
                }
                let qcol = qc.column(xi).expect("trace");
                if !prod.is_some_and(|pr| qcol.le(&pr)) {
                    cols = Some(format!("column of q at {xi}, {h} is not inside the product of p's columns"));
                }
            }
        } else {
            for v in frame.subatomic_sublevels(t, height)? {
                let x = q.creature_at(v.level).and_then(|(_, c)| c.subatom(xi, v));
                let y = p.creature_at(v.level).and_then(|(_, c)| c.subatom(xi, v));
                if !matches!((x, y), (Some(x), Some(y)) if x.le(y)) {
                    sub = Some(format!("subatom of q at {xi}, {v} is not stronger"));
                    break;
                }
            }
        }
    }
    clauses.push(Clause::new(names[3], sub));
    clauses.push(Clause::new(names[4], cols));

    let start = q.w[0];
    clauses.push(Clause::new(
        names[5],
        first_failure((start..height).map(|l| match (q.halving_at(l), p.halving_at(l)) {
            (Some(a), Some(b)) if a >= b => None,
            _ => Some(format!("halving parameter decreases at level {l}")),
        })),
    ));
    Ok(LeqReport { clauses })
}

/// `p ∧ η`: drops the creatures below `ell` and extends the trunk by `η`.
pub fn wedge(frame: &Frame, p: &ConditionPrefix, ell: u64, eta: &[u64]) -> Result<ConditionPrefix, FrameError> {
    let pos = p.w.iter().position(|&h| h == ell).ok_or_else(|| FrameError::Domain(format!("{ell} is not in w")))?;
    if pos + 1 == p.w.len() {
        return Err(FrameError::Domain("wedging at the height leaves no creature".into()));
    }
    let set = poss_set(frame, p, Sublevel::sacks(ell), PossVariant::PerIndex)?;
    if !set.contains(eta) {
        return Err(FrameError::Domain("η is not a possibility below the level".into()));
    }
    let decoded = decode_possibility(&set, eta)?;
    let mut trunk = p.trunk.clone();
    for (xi, v) in decoded {
        if p.trklgth(&xi).expect("in support") < ell {
            trunk.insert(xi, v);
        }
    }
    Ok(ConditionPrefix {
        w: p.w[pos..].to_vec(),
        creatures: p.creatures[pos..].to_vec(),
        trunk,
        schedule: if p.schedule.is_empty() { Vec::new() } else { p.schedule[pos..].to_vec() },
    })
}

/// `p ⋏ η`: shrinks every subatom and column below `u` to the singleton chosen by `η`.
pub fn curlywedge(frame: &Frame, p: &ConditionPrefix, u: Sublevel, eta: &[u64]) -> Result<ConditionPrefix, FrameError> {
    let set = poss_set(frame, p, u, PossVariant::PerIndex)?;
    if !set.contains(eta) {
        return Err(FrameError::Domain("η is not a possibility below the sublevel".into()));
    }
    let decoded = decode_possibility(&set, eta)?;
    let rank: BTreeMap<Sublevel, usize> =
        frame.subatomic_sublevels(0, p.height().expect("checked"))?.into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut creatures = Vec::with_capacity(p.creatures.len());
    for c in &p.creatures {
        let mut sacks = c.columns().clone();
        if Sublevel::sacks(c.m_dn()) < u {
            for (xi, col) in sacks.iter_mut() {
                let Some(TrunkValue::Sacks(bits)) = decoded.get(xi) else { unreachable!("Sacks index decoded") };
                let span = col.interval();
                *col = SacksColumn::singleton(span, bits >> span.start & low_mask(span.len))?;
            }
        }
        let mut grid = c.grid().clone();
        let touched = Sublevel::subatomic(c.m_dn(), 0) < u;
        for (xi, rows) in grid.iter_mut().filter(|_| touched) {
            let Some(TrunkValue::Subatomic(vals)) = decoded.get(xi) else { unreachable!("subatomic index decoded") };
            for (k, row) in rows.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    let v = Sublevel::subatomic(c.m_dn() + k as u64, j as u32);
                    if v < u {
                        *x = Subatom::singleton(vals[rank[&v]]);
                    }
                }
            }
        }
        creatures.push(CompoundCreature::new(frame, c.m_dn(), c.m_up(), sacks, grid, c.halving_all().to_vec())?);
    }
    Ok(p.replace_creatures(creatures))
}

/// Prunes every Sacks column to at most `2^|I_sk,h|` branches.
pub fn prune_condition(frame: &Frame, p: &ConditionPrefix) -> Result<ConditionPrefix, FrameError> {
    let mut creatures = Vec::with_capacity(p.creatures.len());
    for c in &p.creatures {
        let h = c.m_dn();
        let lv = frame.level(h)?;
        let mut sacks = c.columns().clone();
        for col in sacks.values_mut() {
            *col = col.prune(lv.sacks)?;
        }
        let out = CompoundCreature::new(frame, h, c.m_up(), sacks, c.grid().clone(), c.halving_all().to_vec())?;
        let before = compound_norm(frame, c)?.total;
        let after = compound_norm(frame, &out)?.total;
        let cube = NormValue::from_int(nor_sacks_with_arity(lv.sacks.len as u64, lv.big_b, lv.sacks_arity.max(1))? as i64);
        let floor = NormValue::try_min(&[before.clone(), cube])?.expect("two values");
        if !after.ge(&floor)? {
            return Err(FrameError::LemmaViolation(format!("pruning at {h} dropped the norm from {before} to {after}")));
        }
        if after.gt(&NormValue::from_int(1))? && out.supp().len() as u64 >= maxwidth(h) {
            return Err(FrameError::LemmaViolation(format!("pruned creature at {h} has norm > 1 but |supp| >= {h}")));
        }
        creatures.push(out);
    }
    Ok(p.replace_creatures(creatures))
}

fn lex_least(branches: &[u64], len: u32) -> u64 {
    *branches.iter().min_by_key(|b| b.reverse_bits() >> (64 - len.max(1))).expect("nonempty column")
}

/// Extends the trunk at `xi` from its length in `p` up to `to`, taking the
/// lexicographically least choice of `p` at each step.
fn extend_trunk(frame: &Frame, p: &ConditionPrefix, xi: &Index, to: u64) -> Result<TrunkValue, FrameError> {
    let from = p.trklgth(xi).expect("in support");
    let mut t = p.trunk.get(xi).cloned().ok_or_else(|| FrameError::Domain(format!("no trunk at {xi}")))?;
    for (i, c) in p.creatures.iter().enumerate() {
        let h = p.w[i];
        if h < from || h >= to {
            continue;
        }
        match &mut t {
            TrunkValue::Sacks(bits) => {
                let col = c.column(xi).expect("monotone support");
                *bits |= lex_least(col.branches(), col.interval().len) << col.interval().start;
            }
            TrunkValue::Subatomic(vals) => {
                for v in frame.subatomic_sublevels(h, c.m_up().min(to))? {
                    vals.push(c.subatom(xi, v).expect("monotone support").first());
                }
            }
        }
    }
    Ok(t)
}

/// Glues the creatures of `p` between consecutive points of `u` (the height is always kept).
pub fn glue_condition(frame: &Frame, p: &ConditionPrefix, u: &[u64]) -> Result<ConditionPrefix, FrameError> {
    if p.is_empty() {
        return Err(FrameError::Domain("cannot glue the empty condition".into()));
    }
    let height = p.height().expect("nonempty");
    let mut points: Vec<u64> = u.iter().copied().filter(|&h| h < height).collect();
    points.sort_unstable();
    points.dedup();
    if points.first() != p.w.first() {
        return Err(FrameError::Domain("the gluing set must start at min w".into()));
    }
    if let Some(h) = points.iter().find(|h| !p.w.contains(h)) {
        return Err(FrameError::Domain(format!("{h} is not in w")));
    }
    points.push(height);
    let mut creatures = Vec::new();
    let mut schedule = Vec::new();
    for pair in points.windows(2) {
        let lo = p.w.iter().position(|&h| h == pair[0]).expect("in w");
        let hi = p.w.iter().position(|&h| h == pair[1]).expect("in w");
        let parts = &p.creatures[lo..hi];
        let glued = glue(frame, parts)?;
        let n = compound_norm(frame, &glued)?.total;
        let parts_min = NormValue::try_min(
            &parts.iter().map(|c| compound_norm(frame, c).map(|x| x.total)).collect::<Result<Vec<_>, _>>()?,
        )?
        .expect("nonempty");
        if !n.ge(&parts_min)? {
            return Err(FrameError::LemmaViolation(format!("glued norm at {} is below its parts", pair[0])));
        }
        creatures.push(glued);
        if !p.schedule.is_empty() {
            schedule.push(p.schedule[lo].clone());
        }
    }
    let mut trunk = p.trunk.clone();
    for xi in p.supp() {
        let old = p.trklgth(&xi).expect("in support");
        let new = creatures.iter().find(|c| c.supp().contains(&xi)).map_or(height, |c| c.m_dn());
        if new > old {
            trunk.insert(xi, extend_trunk(frame, p, &xi, new)?);
        }
    }
    let q = ConditionPrefix::new(points, creatures, trunk, schedule)?;
    if !leq_check(frame, &q, p)?.holds() {
        return Err(FrameError::LemmaViolation("glued condition is not stronger".into()));
    }
    Ok(q)
}

/// `half(p, >= h)`: halves every creature starting at or above `h`.
pub fn half_condition(frame: &Frame, p: &ConditionPrefix, h: u64) -> Result<ConditionPrefix, FrameError> {
    let creatures = p
        .creatures
        .iter()
        .map(|c| if c.m_dn() >= h { half(frame, c).map_err(FrameError::from) } else { Ok(c.clone()) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(p.replace_creatures(creatures))
}

/// Trunk values for creatures that drop out when restricting or gluing to
/// a later `w` point; used by unhalving.
pub(crate) fn trunk_extended_to(frame: &Frame, p: &ConditionPrefix, xi: &Index, to: u64) -> Result<TrunkValue, FrameError> {
    extend_trunk(frame, p, xi, to)
}

