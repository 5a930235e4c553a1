//! Seeded generators of small conditions on toy frames, and of random
//! strengthenings, for tests and the command line.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::condition::{curlywedge, glue_condition, prune_condition, wedge, ConditionPrefix, TrunkValue};
use super::poss::{poss_set, sacks_start, PossVariant, PossibilitySet};
use super::toy::{uniform_frame, ToyConfig};
use super::{Frame, FrameError, Index, IndexType, Sublevel};
use crate::compound::{compound_norm, CompoundCreature, SubatomGrid};
use crate::exactnum::{NormValue, Rational};
use crate::interval::IndexInterval;
use crate::sacks::{low_mask, SacksColumn};
use crate::subatoms::Subatom;

fn ix(id: u32, ty: IndexType) -> Index {
    Index::new(id, ty)
}

/// A small frame on which possibility sets stay enumerable and
/// `maxposs` follows the recursion.
pub fn algebra_config() -> ToyConfig {
    ToyConfig {
        height: 6,
        sacks_len: 2,
        j_count: 3,
        big_b: 2,
        sub_big_b: 2,
        sacks_arity: 1,
        mu_param: 1,
        maxposs: None,
        nm_len: 2,
        nm_b: 2,
        ls_poss: 4,
        ls_base: 2,
        ls_divisor: 1,
    }
}

pub fn algebra_frame() -> Frame {
    uniform_frame(&algebra_config()).expect("valid toy frame")
}

/// A frame whose lim-inf norms are large enough for halving to leave room.
pub fn unhalving_config() -> ToyConfig {
    ToyConfig {
        height: 7,
        sacks_len: 2,
        j_count: 54,
        big_b: 2,
        sub_big_b: 2,
        sacks_arity: 1,
        mu_param: 0,
        maxposs: Some(1),
        nm_len: 6,
        nm_b: 2,
        ls_poss: 8,
        ls_base: 2,
        ls_divisor: 1,
    }
}

pub fn unhalving_frame() -> Frame {
    uniform_frame(&unhalving_config()).expect("valid toy frame")
}

fn random_subset<R: Rng>(rng: &mut R, n: u64, min: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let mut all: Vec<u64> = (0..n).collect();
    all.shuffle(rng);
    for a in all {
        if v.len() >= min.min(n as usize) {
            break;
        }
        if !v.contains(&a) {
            v.push(a);
        }
    }
    v.sort_unstable();
    v
}

fn random_column<R: Rng>(rng: &mut R, span: IndexInterval) -> Result<SacksColumn, FrameError> {
    let branches = if span.len <= 10 {
        random_subset(rng, 1 << span.len, 1)
    } else {
        (0..rng.gen_range(1..=8)).map(|_| rng.gen::<u64>() & low_mask(span.len)).collect()
    };
    Ok(SacksColumn::new(span, branches)?)
}

fn poss_count(frame: &Frame, ty: IndexType, level: u64) -> Result<u64, FrameError> {
    frame.family(ty, level)?.poss_count_u64().ok_or_else(|| FrameError::Budget("POSS too large to sample".into()))
}

/// A random modest creature on `[m_dn, m_up)` with the given support.
pub fn random_creature<R: Rng>(
    frame: &Frame,
    rng: &mut R,
    m_dn: u64,
    m_up: u64,
    supp: &BTreeSet<Index>,
) -> Result<CompoundCreature, FrameError> {
    let span = frame.sacks_interval(m_dn, m_up)?;
    let mut sacks = BTreeMap::new();
    let non_sk: Vec<Index> = supp.iter().copied().filter(|i| !i.ty.is_sacks()).collect();
    let mut grid: BTreeMap<Index, SubatomGrid> = non_sk.iter().map(|i| (*i, Vec::new())).collect();
    for i in supp.iter().filter(|i| i.ty.is_sacks()) {
        sacks.insert(*i, random_column(rng, span)?);
    }
    for l in m_dn..m_up {
        let j_count = frame.level(l)?.j_count;
        let mut rows: BTreeMap<Index, Vec<Subatom>> = non_sk.iter().map(|i| (*i, Vec::new())).collect();
        for _ in 0..j_count {
            let active = if rng.gen_bool(0.8) { non_sk.choose(rng).copied() } else { None };
            for i in &non_sk {
                let n = poss_count(frame, i.ty, l)?;
                let x = if Some(*i) == active {
                    Subatom::new(random_subset(rng, n, 2))?
                } else {
                    Subatom::singleton(rng.gen_range(0..n))
                };
                rows.get_mut(i).expect("present").push(x);
            }
        }
        for (i, row) in rows {
            grid.get_mut(&i).expect("present").push(row);
        }
    }
    let halving = (m_dn..m_up).map(|_| Rational::new(rng.gen_range(0..3).into(), 4.into())).collect();
    Ok(CompoundCreature::new(frame, m_dn, m_up, sacks, grid, halving)?)
}

fn random_trunk<R: Rng>(frame: &Frame, rng: &mut R, xi: Index, trk: u64) -> Result<TrunkValue, FrameError> {
    if xi.ty.is_sacks() {
        let top = sacks_start(frame, trk)?;
        Ok(TrunkValue::Sacks(rng.gen::<u64>() & low_mask(top as u32)))
    } else {
        let mut v = Vec::new();
        for u in frame.subatomic_sublevels(0, trk)? {
            v.push(rng.gen_range(0..poss_count(frame, xi.ty, u.level)?));
        }
        Ok(TrunkValue::Subatomic(v))
    }
}

/// A random condition prefix whose height is at most the frame height.
pub fn random_condition<R: Rng>(frame: &Frame, rng: &mut R) -> Result<ConditionPrefix, FrameError> {
    let top = frame.height();
    let mut w = vec![rng.gen_range(0..=1u64)];
    let creatures_wanted = rng.gen_range(2..=3);
    while w.len() <= creatures_wanted {
        let last = *w.last().expect("nonempty");
        if last >= top {
            break;
        }
        w.push((last + rng.gen_range(1..=2)).min(top));
    }
    if w.len() < 2 {
        w.push(w[0] + 1);
    }
    let mut supp: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let pool = [ix(1, IndexType::Sk), ix(1, IndexType::Nm), ix(0, IndexType::Cn)];
    for i in pool {
        if rng.gen_bool(0.3) {
            supp.insert(i);
        }
    }
    let mut supports = Vec::new();
    for _ in 1..w.len() {
        supports.push(supp.clone());
        for i in pool {
            if rng.gen_bool(0.3) {
                supp.insert(i);
            }
        }
    }
    let extra = rng.gen_bool(0.25).then_some(ix(1, IndexType::Cn));
    random_condition_on(frame, rng, &w, &supports, extra)
}

/// A random condition with the given `w` and creature supports, plus an
/// optional index that only appears in the trunk.
pub fn random_condition_on<R: Rng>(
    frame: &Frame,
    rng: &mut R,
    w: &[u64],
    supports: &[BTreeSet<Index>],
    trunk_only: Option<Index>,
) -> Result<ConditionPrefix, FrameError> {
    let mut creatures = Vec::new();
    for (pair, supp) in w.windows(2).zip(supports) {
        creatures.push(random_creature(frame, rng, pair[0], pair[1], supp)?);
    }
    let mut all: BTreeSet<Index> = creatures.iter().flat_map(|c| c.supp().iter().copied()).collect();
    all.extend(trunk_only);
    let height = *w.last().expect("nonempty");
    let mut trunk = BTreeMap::new();
    for xi in all {
        let trk = creatures.iter().find(|c| c.supp().contains(&xi)).map_or(height, |c| c.m_dn());
        trunk.insert(xi, random_trunk(frame, rng, xi, trk)?);
    }
    ConditionPrefix::new(w.to_vec(), creatures, trunk, Vec::new())
}

/// A uniformly random element of a possibility set.
pub fn random_possibility<R: Rng>(set: &PossibilitySet, rng: &mut R) -> Vec<u64> {
    set.factors.iter().map(|f| *f.choices.choose(rng).expect("nonempty factor")).collect()
}

fn replace_creature(p: &ConditionPrefix, i: usize, c: CompoundCreature) -> Result<ConditionPrefix, FrameError> {
    let mut cs = p.creatures().to_vec();
    cs[i] = c;
    ConditionPrefix::new(p.w().to_vec(), cs, p.trunk().clone(), p.schedule().to_vec())
}

/// Shrinks one Sacks column or one subatom of one creature.
pub fn random_shrink<R: Rng>(frame: &Frame, p: &ConditionPrefix, rng: &mut R) -> Result<ConditionPrefix, FrameError> {
    let i = rng.gen_range(0..p.creatures().len());
    let c = &p.creatures()[i];
    let mut sacks = c.columns().clone();
    let mut grid = c.grid().clone();
    if !sacks.is_empty() && (grid.is_empty() || rng.gen_bool(0.4)) {
        let key = **sacks.keys().collect::<Vec<_>>().choose(rng).expect("nonempty");
        let col = &sacks[&key];
        let keep = random_subset(rng, col.len() as u64, 1);
        let branches: Vec<u64> = keep.iter().map(|&k| col.branches()[k as usize]).collect();
        sacks.insert(key, SacksColumn::new(col.interval(), branches)?);
    } else {
        let key = **grid.keys().collect::<Vec<_>>().choose(rng).expect("nonempty");
        let rows = grid.get_mut(&key).expect("present");
        let k = rng.gen_range(0..rows.len());
        let j = rng.gen_range(0..rows[k].len());
        let x = &rows[k][j];
        let keep = random_subset(rng, x.len() as u64, 1);
        rows[k][j] = Subatom::new(keep.iter().map(|&t| x.poss()[t as usize]))?;
    }
    let out = CompoundCreature::new(frame, c.m_dn(), c.m_up(), sacks, grid, c.halving_all().to_vec())?;
    replace_creature(p, i, out)
}

/// Applies one randomly chosen strengthening: trunk extension, singleton
/// fixing, raised halving, gluing, shrinking or pruning.
pub fn random_strengthening<R: Rng>(frame: &Frame, p: &ConditionPrefix, rng: &mut R) -> Result<ConditionPrefix, FrameError> {
    let height = p.height().ok_or_else(|| FrameError::Domain("empty condition".into()))?;
    match rng.gen_range(0..6) {
        0 if p.w().len() > 2 => {
            let ell = p.w()[rng.gen_range(0..p.w().len() - 1)];
            let set = poss_set(frame, p, Sublevel::sacks(ell), PossVariant::PerIndex)?;
            wedge(frame, p, ell, &random_possibility(&set, rng))
        }
        1 => {
            let subs = frame.subatomic_sublevels(p.w()[0], height)?;
            let u = *subs.choose(rng).expect("nonempty");
            let set = poss_set(frame, p, u, PossVariant::PerIndex)?;
            curlywedge(frame, p, u, &random_possibility(&set, rng))
        }
        2 => {
            let l = rng.gen_range(p.w()[0]..height);
            let d = p.halving_at(l).cloned().expect("covered") + Rational::new(1.into(), 4.into());
            p.with_halving(l, d)
        }
        3 => {
            let mut u = vec![p.w()[0]];
            u.extend(p.w()[1..].iter().copied().filter(|_| rng.gen_bool(0.5)));
            glue_condition(frame, p, &u)
        }
        5 => prune_condition(frame, p),
        _ => random_shrink(frame, p, rng),
    }
}

/// A modest creature with full columns whose sublevels are shared out
/// evenly, in random order, among the non-Sacks indices, each owner getting
/// its full subatom.
pub fn full_creature<R: Rng>(frame: &Frame, rng: &mut R, m_dn: u64, m_up: u64, supp: &BTreeSet<Index>) -> Result<CompoundCreature, FrameError> {
    let span = frame.sacks_interval(m_dn, m_up)?;
    let mut sacks = BTreeMap::new();
    for i in supp.iter().filter(|i| i.ty.is_sacks()) {
        sacks.insert(*i, SacksColumn::full(span)?);
    }
    let non_sk: Vec<Index> = supp.iter().copied().filter(|i| !i.ty.is_sacks()).collect();
    let mut grid: BTreeMap<Index, SubatomGrid> = BTreeMap::new();
    for l in m_dn..m_up {
        let j = frame.level(l)?.j_count as usize;
        let mut owners: Vec<Index> = (0..j).map(|k| non_sk[k % non_sk.len()]).collect();
        owners.shuffle(rng);
        for i in supp.iter().filter(|i| !i.ty.is_sacks()) {
            let n = poss_count(frame, i.ty, l)?;
            let row = owners
                .iter()
                .map(|o| if o == i { Subatom::full(n) } else { Subatom::singleton(rng.gen_range(0..n)) })
                .collect();
            grid.entry(*i).or_default().push(row);
        }
    }
    let halving = vec![Rational::from_integer(0.into()); (m_up - m_dn) as usize];
    Ok(CompoundCreature::new(frame, m_dn, m_up, sacks, grid, halving)?)
}

/// An unhalving instance `(q, h, r, M)` on [`unhalving_frame`]: `q` has
/// norms at least `M` from `h` on and `r <= half(q, >= h)` starts at `h`
/// with positive norms.
pub fn unhalving_instance<R: Rng>(frame: &Frame, rng: &mut R) -> Result<(ConditionPrefix, u64, ConditionPrefix, Rational), FrameError> {
    let m = Rational::new(1.into(), 2.into());
    let h = rng.gen_range(2..=3u64);
    let mut w = vec![h];
    while *w.last().expect("nonempty") < frame.height() {
        let last = *w.last().expect("nonempty");
        w.push((last + rng.gen_range(1..=2)).min(frame.height()));
    }
    if w.len() < 3 {
        return unhalving_instance(frame, rng);
    }
    let supp: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let mut creatures = Vec::new();
    for pair in w.windows(2) {
        creatures.push(full_creature(frame, rng, pair[0], pair[1], &supp)?);
    }
    let height = *w.last().expect("nonempty");
    let mut all: BTreeSet<Index> = creatures.iter().flat_map(|c| c.supp().iter().copied()).collect();
    if rng.gen_bool(0.3) {
        all.insert(ix(1, IndexType::Cn));
    }
    let mut trunk = BTreeMap::new();
    for xi in all {
        let trk = creatures.iter().find(|c| c.supp().contains(&xi)).map_or(height, |c| c.m_dn());
        trunk.insert(xi, random_trunk(frame, rng, xi, trk)?);
    }
    let q = ConditionPrefix::new(w, creatures, trunk, Vec::new())?;
    let mut r = super::half_condition(frame, &q, h)?;
    // Weaken the first creature of r: shrink lim-inf subatoms a little, lim-sup ones freely.
    let c0 = &r.creatures()[0];
    let mut grid = c0.grid().clone();
    for (i, rows) in grid.iter_mut() {
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                if x.is_singleton() || !rng.gen_bool(0.3) {
                    continue;
                }
                let min = if i.ty.is_liminf() { 46 } else { 2 };
                let keep = random_subset(rng, x.len() as u64, min);
                *x = Subatom::new(keep.iter().map(|&t| x.poss()[t as usize]))?;
            }
        }
    }
    let c0 = CompoundCreature::new(frame, c0.m_dn(), c0.m_up(), c0.columns().clone(), grid, c0.halving_all().to_vec())?;
    r = replace_creature(&r, 0, c0)?;
    for _ in 0..rng.gen_range(0..3) {
        let cand = match rng.gen_range(0..3) {
            0 => {
                let mut u = vec![h];
                u.extend(r.w()[1..].iter().copied().filter(|_| rng.gen_bool(0.6)));
                glue_condition(frame, &r, &u)?
            }
            1 => {
                let l = rng.gen_range(h..height);
                let d = r.halving_at(l).cloned().expect("covered") + Rational::new(1.into(), 16.into());
                r.with_halving(l, d)?
            }
            _ => random_shrink_limsup(frame, &r, rng)?,
        };
        let norms = cand
            .creatures()
            .iter()
            .map(|c| compound_norm(frame, c).map(|n| n.total))
            .collect::<Result<Vec<_>, _>>()?;
        let m_norm = NormValue::rational(m.clone());
        let positive = cand.w().len() >= 3
            && norms[0].gt(&NormValue::zero()).unwrap_or(false)
            && norms[1..].iter().all(|n| n.gt(&m_norm).unwrap_or(false));
        if positive {
            r = cand;
        }
    }
    Ok((q, h, r, m))
}

fn random_shrink_limsup<R: Rng>(frame: &Frame, p: &ConditionPrefix, rng: &mut R) -> Result<ConditionPrefix, FrameError> {
    let i = rng.gen_range(0..p.creatures().len());
    let c = &p.creatures()[i];
    let mut grid = c.grid().clone();
    for (key, rows) in grid.iter_mut() {
        if !key.ty.is_limsup() {
            continue;
        }
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                if !x.is_singleton() && rng.gen_bool(0.2) {
                    let keep = random_subset(rng, x.len() as u64, 4);
                    *x = Subatom::new(keep.iter().map(|&t| x.poss()[t as usize]))?;
                }
            }
        }
    }
    let out = CompoundCreature::new(frame, c.m_dn(), c.m_up(), c.columns().clone(), grid, c.halving_all().to_vec())?;
    replace_creature(p, i, out)
}
