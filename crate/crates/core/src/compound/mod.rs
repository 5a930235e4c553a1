//! Compound creatures: Sacks columns and subatoms between two levels, with
//! halving parameters, and their four-part norm.

mod ops;
mod unhalve;

pub use ops::{
    glue_purely_stronger, build_full, glue, half, is_purely_stronger, is_r_purely_stronger, restrict, union_creature,
    with_halving,
};
pub use unhalve::{unhalve, UnhalveReport};

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::atoms::{atom_norm, AtomError, AtomNorm};
use crate::exactnum::{BigNat, NormValue, NumError, Rational};
use crate::frame::{Frame, FrameError, Index, Sublevel};
use crate::sacks::{nor_sacks_with_arity, SacksColumn, SacksError};
use crate::subatoms::{Subatom, SubatomError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompoundError {
    #[error("invalid creature: {0}")]
    Invalid(String),
    #[error("modesty fails at sublevel {0}: {1} and {2} are both non-singletons")]
    Modesty(Sublevel, Index, Index),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("lemma check failed: {0}")]
    LemmaViolation(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Sacks(#[from] SacksError),
    #[error(transparent)]
    Subatom(#[from] SubatomError),
}

impl From<CompoundError> for FrameError {
    fn from(e: CompoundError) -> Self {
        match e {
            CompoundError::Frame(f) => f,
            other => FrameError::Domain(other.to_string()),
        }
    }
}

/// Subatoms of one non-Sacks index, by level then by `j`.
pub type SubatomGrid = Vec<Vec<Subatom>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundCreature {
    m_dn: u64,
    m_up: u64,
    supp: BTreeSet<Index>,
    sacks: BTreeMap<Index, SacksColumn>,
    grid: BTreeMap<Index, SubatomGrid>,
    halving: Vec<Rational>,
}

fn is_dyadic(q: &Rational) -> bool {
    let d: &num_bigint::BigInt = q.denom();
    d.is_positive() && (d & (d - 1u32)).is_zero()
}

impl CompoundCreature {
    /// Validates shape against the frame and modesty.
    pub fn new(
        frame: &Frame,
        m_dn: u64,
        m_up: u64,
        sacks: BTreeMap<Index, SacksColumn>,
        grid: BTreeMap<Index, SubatomGrid>,
        halving: Vec<Rational>,
    ) -> Result<Self, CompoundError> {
        if m_dn >= m_up {
            return Err(CompoundError::Invalid(format!("m_dn = {m_dn} is not below m_up = {m_up}")));
        }
        let span = frame.sacks_interval(m_dn, m_up)?;
        let mut supp = BTreeSet::new();
        for (ix, col) in &sacks {
            if !ix.ty.is_sacks() {
                return Err(CompoundError::Invalid(format!("{ix} carries a Sacks column")));
            }
            if col.interval() != span {
                return Err(CompoundError::Invalid(format!("column at {ix} spans {} instead of {span}", col.interval())));
            }
            supp.insert(*ix);
        }
        let levels = (m_up - m_dn) as usize;
        for (ix, rows) in &grid {
            if ix.ty.is_sacks() {
                return Err(CompoundError::Invalid(format!("{ix} carries subatoms")));
            }
            if rows.len() != levels {
                return Err(CompoundError::Invalid(format!("{ix} has {} levels of subatoms", rows.len())));
            }
            for (k, row) in rows.iter().enumerate() {
                let l = m_dn + k as u64;
                let lv = frame.level(l)?;
                if row.len() != lv.j_count as usize {
                    return Err(CompoundError::Invalid(format!("{ix} at level {l} has {} sublevels", row.len())));
                }
                let fam = frame.family(ix.ty, l)?;
                if let Some(j) = row.iter().position(|x| !fam.contains(x)) {
                    return Err(CompoundError::Invalid(format!("subatom of {ix} at ({l},{j}) is outside its family")));
                }
            }
            supp.insert(*ix);
        }
        if supp.is_empty() {
            return Err(CompoundError::Invalid("empty support".into()));
        }
        if halving.len() != levels || halving.iter().any(|d| d.is_negative() || !is_dyadic(d)) {
            return Err(CompoundError::Invalid("halving parameters must be nonnegative dyadics, one per level".into()));
        }
        let c = CompoundCreature { m_dn, m_up, supp, sacks, grid, halving };
        c.check_modesty()?;
        Ok(c)
    }

    fn check_modesty(&self) -> Result<(), CompoundError> {
        let Some(rows) = self.grid.values().next() else { return Ok(()) };
        for (k, row) in rows.iter().enumerate() {
            for j in 0..row.len() {
                let mut active: Option<Index> = None;
                for (ix, g) in &self.grid {
                    if !g[k][j].is_singleton() {
                        if let Some(prev) = active {
                            return Err(CompoundError::Modesty(Sublevel::subatomic(self.m_dn + k as u64, j as u32), prev, *ix));
                        }
                        active = Some(*ix);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn m_dn(&self) -> u64 {
        self.m_dn
    }

    pub fn m_up(&self) -> u64 {
        self.m_up
    }

    pub fn supp(&self) -> &BTreeSet<Index> {
        &self.supp
    }

    pub fn column(&self, ix: &Index) -> Option<&SacksColumn> {
        self.sacks.get(ix)
    }

    pub fn columns(&self) -> &BTreeMap<Index, SacksColumn> {
        &self.sacks
    }

    pub fn grid(&self) -> &BTreeMap<Index, SubatomGrid> {
        &self.grid
    }

    pub fn subatom(&self, ix: &Index, u: Sublevel) -> Option<&Subatom> {
        if u.is_sacks() || u.level < self.m_dn || u.level >= self.m_up {
            return None;
        }
        self.grid.get(ix)?.get((u.level - self.m_dn) as usize)?.get(u.j as usize)
    }

    /// `d(level)`.
    pub fn halving(&self, level: u64) -> Option<&Rational> {
        level.checked_sub(self.m_dn).and_then(|k| self.halving.get(k as usize))
    }

    pub fn halving_all(&self) -> &[Rational] {
        &self.halving
    }

    /// The active index at a subatomic sublevel, if any subatom there is not a singleton.
    pub fn active_index(&self, u: Sublevel) -> Option<Index> {
        self.grid
            .iter()
            .find(|(ix, _)| self.subatom(ix, u).map(|x| !x.is_singleton()).unwrap_or(false))
            .map(|(ix, _)| *ix)
    }

    /// Norm of the atom at `(ix, level)`.
    pub fn atom_norm(&self, frame: &Frame, ix: &Index, level: u64) -> Result<AtomNorm, CompoundError> {
        let row = self
            .grid
            .get(ix)
            .and_then(|g| g.get((level - self.m_dn) as usize))
            .ok_or_else(|| CompoundError::Domain(format!("no atom at {ix}, level {level}")))?;
        let fam = frame.family(ix.ty, level)?;
        let norms = row.iter().map(|x| fam.norm(x)).collect::<Result<Vec<_>, _>>()?;
        Ok(atom_norm(frame.level(level)?.mu_param, &norms)?)
    }

    /// Replaces the halving parameters.
    pub fn set_halving(&self, halving: Vec<Rational>) -> Result<Self, CompoundError> {
        if halving.len() != self.halving.len() || halving.iter().any(|d| d.is_negative() || !is_dyadic(d)) {
            return Err(CompoundError::Invalid("halving parameters must be nonnegative dyadics, one per level".into()));
        }
        Ok(CompoundCreature { halving, ..self.clone() })
    }

    pub(crate) fn from_parts_unchecked(
        m_dn: u64,
        m_up: u64,
        sacks: BTreeMap<Index, SacksColumn>,
        grid: BTreeMap<Index, SubatomGrid>,
        halving: Vec<Rational>,
    ) -> Self {
        let supp = sacks.keys().chain(grid.keys()).copied().collect();
        CompoundCreature { m_dn, m_up, supp, sacks, grid, halving }
    }
}

/// The four subnorm families and their minimum.
#[derive(Debug, Clone)]
pub struct CompoundNorm {
    pub width: NormValue,
    pub sacks: BTreeMap<Index, u64>,
    pub limsup: BTreeMap<Index, NormValue>,
    pub liminf: BTreeMap<u64, NormValue>,
    pub total: NormValue,
}

impl CompoundNorm {
    /// Every component value, width first.
    pub fn components(&self) -> Vec<NormValue> {
        let mut v = vec![self.width.clone()];
        v.extend(self.sacks.values().map(|&n| NormValue::from_int(n as i64)));
        v.extend(self.limsup.values().cloned());
        v.extend(self.liminf.values().cloned());
        v
    }
}

/// `N` at a level: the least atom norm over the lim-inf indices of the support.
pub fn liminf_base(frame: &Frame, c: &CompoundCreature, level: u64) -> Result<Option<NormValue>, CompoundError> {
    let mut norms = Vec::new();
    for ix in c.supp.iter().filter(|ix| ix.ty.is_liminf()) {
        norms.push(c.atom_norm(frame, ix, level)?.value);
    }
    Ok(NormValue::try_min(&norms)?)
}

/// `log2(max(1, N - d)) / maxposs(<m_dn)`.
pub fn liminf_value(n: &NormValue, d: &Rational, maxposs: &BigNat) -> NormValue {
    n.sub_rational(d.clone())
        .log2_clamped()
        .scale(Rational::new(1.into(), num_bigint::BigInt::from(maxposs.clone())))
}

pub fn compound_norm(frame: &Frame, c: &CompoundCreature) -> Result<CompoundNorm, CompoundError> {
    let width = NormValue::frac(crate::sacks::maxwidth(c.m_dn) as i64, c.supp.len() as i64);
    let lv = frame.level(c.m_dn)?;
    let mut sacks = BTreeMap::new();
    for (ix, col) in &c.sacks {
        let n = nor_sacks_with_arity(col.splitting_size() as u64, lv.big_b, lv.sacks_arity)?;
        sacks.insert(*ix, n);
    }
    let mut atoms: BTreeMap<(Index, u64), NormValue> = BTreeMap::new();
    for ix in c.grid.keys() {
        for l in c.m_dn..c.m_up {
            atoms.insert((*ix, l), c.atom_norm(frame, ix, l)?.value);
        }
    }
    let mut limsup = BTreeMap::new();
    for ix in c.grid.keys() {
        let vals: Vec<NormValue> = (c.m_dn..c.m_up).map(|l| atoms[&(*ix, l)].clone()).collect();
        limsup.insert(*ix, NormValue::try_max(&vals)?.expect("at least one level"));
    }
    let mut liminf = BTreeMap::new();
    let li: Vec<Index> = c.grid.keys().filter(|ix| ix.ty.is_liminf()).copied().collect();
    if !li.is_empty() {
        for (k, l) in (c.m_dn..c.m_up).enumerate() {
            let vals: Vec<NormValue> = li.iter().map(|ix| atoms[&(*ix, l)].clone()).collect();
            let n = NormValue::try_min(&vals)?.expect("nonempty");
            liminf.insert(l, liminf_value(&n, &c.halving[k], &lv.maxposs_below));
        }
    }
    let mut all = vec![width.clone()];
    all.extend(sacks.values().map(|&n| NormValue::from_int(n as i64)));
    all.extend(limsup.values().cloned());
    all.extend(liminf.values().cloned());
    let total = NormValue::try_min(&all)?.expect("width present");
    Ok(CompoundNorm { width, sacks, limsup, liminf, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;
    use crate::frame::toy::{uniform_frame, ToyConfig};
    use crate::frame::IndexType;

    fn frame() -> Frame {
        uniform_frame(&ToyConfig::default()).unwrap()
    }

    fn singleton_grid(frame: &Frame, lo: u64, hi: u64) -> SubatomGrid {
        (lo..hi).map(|l| vec![Subatom::singleton(0); frame.level(l).unwrap().j_count as usize]).collect()
    }

    #[test]
    fn width_and_absent_liminf() {
        let f = frame();
        let sk = Index::new(0, IndexType::Sk);
        let nn = Index::new(1, IndexType::Nn);
        let col = SacksColumn::full(f.sacks_interval(2, 4).unwrap()).unwrap();
        let c = CompoundCreature::new(
            &f,
            2,
            4,
            BTreeMap::from([(sk, col)]),
            BTreeMap::from([(nn, singleton_grid(&f, 2, 4))]),
            vec![ratio(0, 1), ratio(0, 1)],
        )
        .unwrap();
        let n = compound_norm(&f, &c).unwrap();
        assert_eq!(n.width.exact(), Some(ratio(1, 1)));
        assert!(n.liminf.is_empty());
        assert_eq!(n.sacks[&sk], 2);
        assert_eq!(n.total.exact(), Some(ratio(0, 1)));
    }

    #[test]
    fn modesty_violation_rejected() {
        let f = frame();
        let a = Index::new(1, IndexType::Nm);
        let b = Index::new(2, IndexType::Nn);
        let mut g = singleton_grid(&f, 1, 2);
        g[0][3] = Subatom::full(4);
        let r = CompoundCreature::new(&f, 1, 2, BTreeMap::new(), BTreeMap::from([(a, g.clone()), (b, g)]), vec![ratio(0, 1)]);
        assert!(matches!(r, Err(CompoundError::Modesty(..))));
    }

    #[test]
    fn liminf_formula() {
        // d = 0, N = 9, maxposs = 2 gives log2(9) / 2
        let v = liminf_value(&NormValue::from_int(9), &ratio(0, 1), &BigNat::from(2u32));
        let expect = NormValue::log_quotient_u64(2, 9, ratio(2, 1));
        assert!(v.try_cmp(&expect).unwrap().is_eq());
    }
}
