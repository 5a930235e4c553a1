//! Atoms: sequences of subatoms indexed by a finite set `J`, the measure
//! `mu^ell` on subsets of `J`, and disjointification of subsets of `J`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::exactnum::{BigNat, NormValue, NumError, Rational};
use crate::subatoms::{FamilyRef, Subatom, SubatomError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtomError {
    #[error("an atom needs a nonempty index set")]
    EmptyIndexSet,
    #[error("component {0} is not a member of its family")]
    NotMember(usize),
    #[error("{sets} sets exceed the bound ell + 1 = {limit}")]
    TooManySets { sets: usize, limit: u64 },
    #[error("disjointification failed: {0}")]
    LemmaViolation(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Subatom(#[from] SubatomError),
}

/// `mu^ell(A) = log_3(max(|A|, 1)) / (ell + 1)`.
pub fn mu(ell: u64, size: u64) -> NormValue {
    NormValue::log_quotient_u64(3, size.max(1), Rational::from_integer((ell + 1).into()))
}

/// One coordinate of an atom.
#[derive(Debug, Clone)]
pub struct Component {
    pub family: FamilyRef,
    pub subatom: Subatom,
}

#[derive(Debug, Clone)]
pub struct Atom {
    level: u64,
    components: Vec<Component>,
}

/// The atom norm together with a witnessing subset of `J`, in increasing order.
#[derive(Debug, Clone)]
pub struct AtomNorm {
    pub value: NormValue,
    pub witness: Vec<usize>,
}

impl Atom {
    pub fn new(level: u64, components: Vec<Component>) -> Result<Self, AtomError> {
        if components.is_empty() {
            return Err(AtomError::EmptyIndexSet);
        }
        if let Some(j) = components.iter().position(|c| !c.family.contains(&c.subatom)) {
            return Err(AtomError::NotMember(j));
        }
        Ok(Atom { level, components })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn width(&self) -> usize {
        self.components.len()
    }

    /// Replaces the subatom at `j`, checking membership.
    pub fn with_component(&self, j: usize, subatom: Subatom) -> Result<Atom, AtomError> {
        let mut out = self.clone();
        if !out.components[j].family.contains(&subatom) {
            return Err(AtomError::NotMember(j));
        }
        out.components[j].subatom = subatom;
        Ok(out)
    }

    /// Keeps the components at `keep` and makes every other one a singleton.
    pub fn shrink_outside(&self, keep: &[usize]) -> Atom {
        let mut out = self.clone();
        for (j, c) in out.components.iter_mut().enumerate() {
            if keep.binary_search(&j).is_err() {
                c.subatom = Subatom::singleton(c.subatom.first());
            }
        }
        out
    }

    /// Componentwise `self <= other` on the same families.
    pub fn le(&self, other: &Atom) -> bool {
        self.level == other.level
            && self.width() == other.width()
            && self.components.iter().zip(&other.components).all(|(a, b)| a.subatom.le(&b.subatom))
    }

    pub fn component_norms(&self) -> Result<Vec<NormValue>, AtomError> {
        self.components
            .iter()
            .map(|c| c.family.norm(&c.subatom).map_err(AtomError::from))
            .collect()
    }

    pub fn norm(&self) -> Result<AtomNorm, AtomError> {
        atom_norm(self.level, &self.component_norms()?)
    }
}

/// The largest `r` such that some `A ⊆ J` has `mu^ell(A) >= r` and every
/// norm indexed by `A` is at least `r`.
///
/// Among maximizers the witness is the one of smallest size, built from the
/// largest norms with ties broken by index.
pub fn atom_norm(ell: u64, norms: &[NormValue]) -> Result<AtomNorm, AtomError> {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    let mut failure = None;
    order.sort_by(|&a, &b| match norms[b].try_cmp(&norms[a]) {
        Ok(o) => o.then(a.cmp(&b)),
        Err(e) => {
            failure.get_or_insert(e);
            a.cmp(&b)
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut best = NormValue::zero();
    let mut best_k = 0usize;
    for k in 1..=norms.len() {
        let m = mu(ell, k as u64);
        let n = &norms[order[k - 1]];
        let cand = if m.le(n)? { m } else { n.clone() };
        if cand.gt(&best)? {
            best = cand;
            best_k = k;
        }
    }
    let mut witness: Vec<usize> = order[..best_k].to_vec();
    witness.sort_unstable();
    Ok(AtomNorm { value: best, witness })
}

/// Exponential reference implementation over all subsets, for small `J`.
pub fn atom_norm_brute(ell: u64, norms: &[NormValue]) -> Result<NormValue, AtomError> {
    assert!(norms.len() <= 20, "brute force is for small index sets");
    let mut best = NormValue::zero();
    for mask in 1u32..1 << norms.len() {
        let mut r = mu(ell, mask.count_ones() as u64);
        for (j, n) in norms.iter().enumerate() {
            if mask >> j & 1 == 1 && n.try_cmp(&r)? == Ordering::Less {
                r = n.clone();
            }
        }
        if r.gt(&best)? {
            best = r;
        }
    }
    Ok(best)
}

fn three_pow(e: u64) -> BigNat {
    num_traits::pow(BigNat::from(3u32), e as usize)
}

/// Pairwise disjoint `B_i ⊆ A_i` with `mu^ell(B_i) >= mu^ell(A_i) - 1`.
///
/// Sets of measure at most 1 are emptied. Every other pair is separated by
/// splitting its intersection alternately, the first element staying with
/// the lower-indexed set.
pub fn split_j(ell: u64, sets: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, AtomError> {
    if sets.len() as u64 > ell + 1 {
        return Err(AtomError::TooManySets { sets: sets.len(), limit: ell + 1 });
    }
    let big = three_pow(ell + 1);
    let mut cur: Vec<Vec<u64>> = sets
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.sort_unstable();
            a.dedup();
            if BigNat::from(a.len()) <= big {
                Vec::new()
            } else {
                a
            }
        })
        .collect();
    let originals: Vec<usize> = sets
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.sort_unstable();
            a.dedup();
            a.len()
        })
        .collect();
    for i0 in 0..cur.len() {
        for i1 in i0 + 1..cur.len() {
            if cur[i0].is_empty() || cur[i1].is_empty() {
                continue;
            }
            let (before0, before1) = (cur[i0].len(), cur[i1].len());
            let common: Vec<u64> = cur[i0].iter().copied().filter(|x| cur[i1].binary_search(x).is_ok()).collect();
            let (mut drop0, mut drop1) = (Vec::new(), Vec::new());
            for (t, x) in common.into_iter().enumerate() {
                if t % 2 == 0 {
                    drop1.push(x);
                } else {
                    drop0.push(x);
                }
            }
            cur[i0].retain(|x| drop0.binary_search(x).is_err());
            cur[i1].retain(|x| drop1.binary_search(x).is_err());
            if 3 * cur[i0].len() < before0 || 3 * cur[i1].len() < before1 {
                return Err(AtomError::LemmaViolation(format!("pair ({i0}, {i1}) lost more than two thirds")));
            }
        }
    }
    for (i, b) in cur.iter().enumerate() {
        if &big * BigNat::from(b.len().max(1)) < BigNat::from(originals[i]) {
            return Err(AtomError::LemmaViolation(format!("set {i} lost more than one unit of measure")));
        }
    }
    Ok(cur)
}

/// Whether the sets are pairwise disjoint.
pub fn pairwise_disjoint(sets: &[Vec<u64>]) -> bool {
    let mut all: Vec<u64> = sets.iter().flatten().copied().collect();
    let n = all.len();
    all.sort_unstable();
    all.dedup();
    all.len() == n
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn mu_examples() {
        assert_eq!(mu(3, 0).exact(), Some(ratio(0, 1)));
        assert_eq!(mu(1, 9).exact(), Some(ratio(1, 1)));
        assert_eq!(mu(0, 3).exact(), Some(ratio(1, 1)));
    }

    #[test]
    fn norm_of_three_components() {
        let norms = vec![NormValue::from_int(2), NormValue::from_int(1), NormValue::frac(1, 2)];
        let r = atom_norm(0, &norms).unwrap();
        assert_eq!(r.witness, vec![0, 1]);
        assert!(r.value.try_cmp(&mu(0, 2)).unwrap().is_eq());
        assert!(r.value.try_cmp(&atom_norm_brute(0, &norms).unwrap()).unwrap().is_eq());
    }

    #[test]
    fn zero_norms() {
        let r = atom_norm(2, &[NormValue::zero(), NormValue::zero()]).unwrap();
        assert_eq!(r.value.exact(), Some(ratio(0, 1)));
        assert!(r.witness.is_empty());
    }

    #[test]
    fn split_two_copies() {
        let j: Vec<u64> = (0..27).collect();
        let b = split_j(1, &[j.clone(), j]).unwrap();
        assert!(pairwise_disjoint(&b));
        assert!(b.iter().all(|s| s.len() >= 9));
    }

    #[test]
    fn split_single_and_small() {
        let a: Vec<u64> = (0..100).collect();
        assert_eq!(split_j(0, &[a.clone()]).unwrap(), vec![a]);
        let b = split_j(1, &[(0..9).collect(), (0..30).collect()]).unwrap();
        assert!(b[0].is_empty());
        assert_eq!(b[1].len(), 30);
        assert!(split_j(0, &[vec![1], vec![2]]).is_err());
    }
}
