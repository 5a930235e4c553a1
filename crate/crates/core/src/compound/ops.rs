//! Operations on compound creatures.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{compound_norm, is_dyadic, liminf_base, CompoundCreature, CompoundError, SubatomGrid};
use crate::atoms::split_j;
use crate::exactnum::{NormValue, Rational, DEFAULT_PRECISION};
use crate::frame::{Frame, Index};
use crate::sacks::{maxwidth, SacksColumn};
use crate::subatoms::Subatom;

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Glues a properly stacked sequence: the support of the first creature,
/// products of Sacks columns, concatenated subatoms and halving parameters.
pub fn glue(frame: &Frame, parts: &[CompoundCreature]) -> Result<CompoundCreature, CompoundError> {
    let first = parts.first().ok_or_else(|| CompoundError::Domain("nothing to glue".into()))?;
    for w in parts.windows(2) {
        if w[0].m_up != w[1].m_dn || !w[0].supp.is_subset(&w[1].supp) {
            return Err(CompoundError::Domain(format!(
                "creatures on [{}, {}) and [{}, {}) are not properly stacked",
                w[0].m_dn, w[0].m_up, w[1].m_dn, w[1].m_up
            )));
        }
    }
    let last = parts.last().expect("nonempty");
    let mut sacks = BTreeMap::new();
    for (ix, col) in &first.sacks {
        let mut acc = col.clone();
        for p in &parts[1..] {
            acc = acc.product(&p.sacks[ix])?;
        }
        sacks.insert(*ix, acc);
    }
    let mut grid = BTreeMap::new();
    for ix in first.grid.keys() {
        let rows: SubatomGrid = parts.iter().flat_map(|p| p.grid[ix].iter().cloned()).collect();
        grid.insert(*ix, rows);
    }
    let halving = parts.iter().flat_map(|p| p.halving.iter().cloned()).collect();
    CompoundCreature::new(frame, first.m_dn, last.m_up, sacks, grid, halving)
}

/// Dyadic lower bound of `v`, exact when `v` is a known dyadic.
fn dyadic_floor(v: &NormValue, prec: u32) -> Rational {
    match v.exact() {
        Some(q) if is_dyadic(&q) => q,
        _ => v.lower_bound(prec),
    }
}

/// Raises each halving parameter `d` to (a dyadic lower bound of) `(N + d) / 2`.
///
/// Levels without lim-inf indices, or where `N <= d`, keep their parameter.
/// The norm drops by at most `1 / maxposs(<m_dn)`; this is checked.
pub fn half(frame: &Frame, c: &CompoundCreature) -> Result<CompoundCreature, CompoundError> {
    half_with_precision(frame, c, DEFAULT_PRECISION)
}

pub fn half_with_precision(frame: &Frame, c: &CompoundCreature, prec: u32) -> Result<CompoundCreature, CompoundError> {
    let mut halving = c.halving.clone();
    for (k, l) in (c.m_dn..c.m_up).enumerate() {
        let Some(n) = liminf_base(frame, c, l)? else { continue };
        let d = &c.halving[k];
        let mid = n.sub_rational(-d.clone()).scale(Rational::new(1.into(), 2.into()));
        let cand = dyadic_floor(&mid, prec);
        if &cand > d {
            halving[k] = cand;
        }
    }
    let out = c.set_halving(halving)?;
    let before = compound_norm(frame, c)?.total;
    let after = compound_norm(frame, &out)?.total;
    let mp = &frame.level(c.m_dn)?.maxposs_below;
    let slack = Rational::new(1.into(), BigInt::from(mp.clone()));
    if !after.ge(&before.sub_rational(slack))? {
        return Err(CompoundError::LemmaViolation("halving lowered the norm by more than 1/maxposs".into()));
    }
    Ok(out)
}

/// Sets the halving parameter at `level`.
pub fn with_halving(c: &CompoundCreature, level: u64, d: Rational) -> Result<CompoundCreature, CompoundError> {
    let k = level
        .checked_sub(c.m_dn)
        .filter(|&k| k < c.halving.len() as u64)
        .ok_or_else(|| CompoundError::Domain(format!("level {level} outside the creature")))?;
    let mut h = c.halving.clone();
    h[k as usize] = d;
    c.set_halving(h)
}

fn meets_all_types(u: &BTreeSet<Index>) -> bool {
    u.iter().any(|i| i.ty.is_sacks()) && u.iter().any(|i| i.ty.is_liminf()) && u.iter().any(|i| i.ty.is_limsup())
}

pub(crate) fn restrict_unchecked(c: &CompoundCreature, u: &BTreeSet<Index>) -> CompoundCreature {
    let sacks = c.sacks.iter().filter(|(i, _)| u.contains(i)).map(|(i, s)| (*i, s.clone())).collect();
    let grid = c.grid.iter().filter(|(i, _)| u.contains(i)).map(|(i, g)| (*i, g.clone())).collect();
    CompoundCreature::from_parts_unchecked(c.m_dn, c.m_up, sacks, grid, c.halving.clone())
}

/// Restriction to a subset of the support meeting the Sacks, lim-inf and
/// lim-sup types. The norm does not decrease; this is checked.
pub fn restrict(frame: &Frame, c: &CompoundCreature, u: &BTreeSet<Index>) -> Result<CompoundCreature, CompoundError> {
    if !u.is_subset(&c.supp) {
        return Err(CompoundError::Domain("restriction set is not inside the support".into()));
    }
    if !meets_all_types(u) {
        return Err(CompoundError::Domain("restriction set must meet the sk, lim-inf and lim-sup types".into()));
    }
    let out = restrict_unchecked(c, u);
    let before = compound_norm(frame, c)?.total;
    let after = compound_norm(frame, &out)?.total;
    if !after.ge(&before)? {
        return Err(CompoundError::LemmaViolation("restriction lowered the norm".into()));
    }
    Ok(out)
}

/// Makes the creature modest by disjointifying, per level, the witness sets
/// of the atoms and shrinking every other subatom to a singleton.
fn make_modest(frame: &Frame, c: &CompoundCreature) -> Result<CompoundCreature, CompoundError> {
    let idx: Vec<Index> = c.grid.keys().copied().collect();
    let mut grid = c.grid.clone();
    for (k, l) in (c.m_dn..c.m_up).enumerate() {
        let mut sets = Vec::with_capacity(idx.len());
        for ix in &idx {
            let w = c.atom_norm(frame, ix, l)?.witness;
            sets.push(w.into_iter().map(|j| j as u64).collect::<Vec<u64>>());
        }
        let ell = frame.level(l)?.mu_param;
        let parts = split_j(ell, &sets)?;
        for (ix, keep) in idx.iter().zip(parts) {
            let row = &mut grid.get_mut(ix).expect("present")[k];
            for (j, x) in row.iter_mut().enumerate() {
                if keep.binary_search(&(j as u64)).is_err() {
                    *x = Subatom::singleton(x.first());
                }
            }
        }
    }
    CompoundCreature::new(frame, c.m_dn, c.m_up, c.sacks.clone(), grid, c.halving.clone())
}

/// Union of two creatures agreeing on the common support, made modest.
///
/// Checks that the norm is at least `x/2 - 1` for `x` the smaller input norm,
/// and that each restriction is purely stronger than its input.
pub fn union_creature(frame: &Frame, c1: &CompoundCreature, c2: &CompoundCreature) -> Result<CompoundCreature, CompoundError> {
    if c1.m_dn != c2.m_dn || c1.m_up != c2.m_up || c1.halving != c2.halving {
        return Err(CompoundError::Domain("levels or halving parameters differ".into()));
    }
    for ix in c1.supp.intersection(&c2.supp) {
        if c1.sacks.get(ix) != c2.sacks.get(ix) || c1.grid.get(ix) != c2.grid.get(ix) {
            return Err(CompoundError::Domain(format!("the creatures differ at the shared index {ix}")));
        }
    }
    let mut sacks = c1.sacks.clone();
    sacks.extend(c2.sacks.iter().map(|(i, s)| (*i, s.clone())));
    let mut grid = c1.grid.clone();
    grid.extend(c2.grid.iter().map(|(i, g)| (*i, g.clone())));
    let raw = CompoundCreature::from_parts_unchecked(c1.m_dn, c1.m_up, sacks, grid, c1.halving.clone());
    let out = make_modest(frame, &raw)?;
    for c in [c1, c2] {
        if !is_purely_stronger(&restrict_unchecked(&out, &c.supp), c) {
            return Err(CompoundError::LemmaViolation("a restriction of the union is not purely stronger".into()));
        }
    }
    let x = NormValue::try_min(&[compound_norm(frame, c1)?.total, compound_norm(frame, c2)?.total])?.expect("two");
    let bound = x.scale(Rational::new(1.into(), 2.into())).sub_rational(rat(1));
    if !compound_norm(frame, &out)?.total.ge(&bound)? {
        return Err(CompoundError::LemmaViolation("union norm below x/2 - 1".into()));
    }
    Ok(out)
}

/// A creature on `[m_dn, m_up)` with the given support whose norm is the width norm.
///
/// Starts from full columns and full subatoms and disjointifies each level.
pub fn build_full(frame: &Frame, m_dn: u64, m_up: u64, supp: &BTreeSet<Index>) -> Result<CompoundCreature, CompoundError> {
    if !(2 < m_dn && m_dn < m_up) {
        return Err(CompoundError::Domain("need 2 < m_dn < m_up".into()));
    }
    if supp.len() as u64 >= maxwidth(m_dn) {
        return Err(CompoundError::Domain(format!("|supp| = {} is not below maxwidth(m_dn) = {m_dn}", supp.len())));
    }
    if !meets_all_types(supp) {
        return Err(CompoundError::Domain("support must meet the sk, lim-inf and lim-sup types".into()));
    }
    let span = frame.sacks_interval(m_dn, m_up)?;
    let mut sacks = BTreeMap::new();
    let mut grid = BTreeMap::new();
    for ix in supp {
        if ix.ty.is_sacks() {
            sacks.insert(*ix, SacksColumn::full(span)?);
        } else {
            let mut rows = Vec::new();
            for l in m_dn..m_up {
                let full = frame.family(ix.ty, l)?.full()?;
                rows.push(vec![full; frame.level(l)?.j_count as usize]);
            }
            grid.insert(*ix, rows);
        }
    }
    let halving = vec![Rational::zero(); (m_up - m_dn) as usize];
    let raw = CompoundCreature::from_parts_unchecked(m_dn, m_up, sacks, grid, halving);
    let out = make_modest(frame, &raw)?;
    let n = compound_norm(frame, &out)?;
    if !n.total.ge(&n.width)? {
        return Err(CompoundError::LemmaViolation(format!(
            "the frame's subatoms or columns are too small: norm {} below width {}",
            n.total, n.width
        )));
    }
    Ok(out)
}

/// Same levels, halving parameters and support, with every column and
/// subatom of `d` inside the corresponding one of `c`.
pub fn is_purely_stronger(d: &CompoundCreature, c: &CompoundCreature) -> bool {
    d.m_dn == c.m_dn
        && d.m_up == c.m_up
        && d.halving == c.halving
        && d.supp == c.supp
        && c.sacks.iter().all(|(i, s)| d.sacks[i].le(s))
        && c.grid.iter().all(|(i, g)| {
            g.iter().zip(&d.grid[i]).all(|(rc, rd)| rc.iter().zip(rd).all(|(x, y)| y.le(x)))
        })
}

/// Purely stronger with norm at least `nor(c) - r`.
pub fn is_r_purely_stronger(frame: &Frame, d: &CompoundCreature, c: &CompoundCreature, r: &Rational) -> Result<bool, CompoundError> {
    if !is_purely_stronger(d, c) {
        return Ok(false);
    }
    let nd = compound_norm(frame, d)?.total;
    let nc = compound_norm(frame, c)?.total;
    Ok(nd.ge(&nc.sub_rational(r.clone()))?)
}

/// Glues `d_0, ..., d_{n-1}, c_n` where each `d_i` is purely stronger than
/// `c_i` and agrees with it on the lim-inf indices, checking that the result
/// has norm at least the least `nor(c_i)`.
pub fn glue_purely_stronger(frame: &Frame, cs: &[CompoundCreature], ds: &[CompoundCreature]) -> Result<CompoundCreature, CompoundError> {
    if cs.len() < 2 || ds.len() + 1 != cs.len() {
        return Err(CompoundError::Domain("need n + 1 creatures and n replacements, n > 0".into()));
    }
    for (c, d) in cs.iter().zip(ds) {
        if !is_purely_stronger(d, c) {
            return Err(CompoundError::Domain("a replacement is not purely stronger".into()));
        }
        if c.grid.iter().any(|(i, g)| i.ty.is_liminf() && d.grid[i] != *g) {
            return Err(CompoundError::Domain("a replacement changes the lim-inf part".into()));
        }
    }
    let mut parts: Vec<CompoundCreature> = ds.to_vec();
    parts.push(cs.last().expect("nonempty").clone());
    let out = glue(frame, &parts)?;
    let m = NormValue::try_min(&cs.iter().map(|c| compound_norm(frame, c).map(|n| n.total)).collect::<Result<Vec<_>, _>>()?)?
        .expect("nonempty");
    if !compound_norm(frame, &out)?.total.ge(&m)? {
        return Err(CompoundError::LemmaViolation("glued norm below the least input norm".into()));
    }
    Ok(out)
}
