//! Homogenizing a coloring of a product of subatoms by downward induction,
//! one strong-bigness step per sublevel.

use std::collections::BTreeMap;

use super::FrameError;
use crate::exactnum::{BigNat, NormValue, Rational};
use crate::par;
use crate::subatoms::{FamilyRef, Subatom};

const PRODUCT_LIMIT: u64 = 1 << 22;

/// One coordinate: the family at its sublevel, the subatom and `b(u)`.
#[derive(Debug, Clone)]
pub struct HomogenizeInput {
    pub family: FamilyRef,
    pub subatom: Subatom,
    pub b: u64,
}

fn product_len(xs: &[Subatom]) -> Option<u64> {
    xs.iter().try_fold(1u64, |acc, x| acc.checked_mul(x.len() as u64))
}

fn tuple_at(xs: &[Subatom], mut rank: u64, out: &mut Vec<u64>) {
    out.clear();
    for x in xs.iter().rev() {
        let n = x.len() as u64;
        out.push(x.poss()[(rank % n) as usize]);
        rank /= n;
    }
    out.reverse();
}

/// Strengthens each subatom (inputs ordered by sublevel) so that `f` is
/// constant on the product, losing at most `1/b(u)` of norm at each `u`.
///
/// Requires the product of the possibility sets below each sublevel to have
/// fewer than `b(u)` elements.
pub fn strong_bigness_homogenize(
    inputs: &[HomogenizeInput],
    f: &(dyn Fn(&[u64]) -> u64 + Sync),
) -> Result<Vec<Subatom>, FrameError> {
    let mut ys: Vec<Subatom> = inputs.iter().map(|i| i.subatom.clone()).collect();
    if product_len(&ys).is_none_or(|n| n > PRODUCT_LIMIT) {
        return Err(FrameError::Budget("product of possibility sets is too large".into()));
    }
    for k in (0..inputs.len()).rev() {
        let below = &ys[..k];
        let p_len = product_len(below).expect("checked");
        if BigNat::from(p_len) >= BigNat::from(inputs[k].b) {
            return Err(FrameError::Precondition(format!(
                "{p_len} possibilities below coordinate {k} are not fewer than b = {}",
                inputs[k].b
            )));
        }
        let above: Vec<u64> = ys[k + 1..].iter().map(|y| y.first()).collect();
        let here = ys[k].poss().to_vec();
        let signatures: Vec<Vec<u64>> = par::map_slice(&here, |&a| {
            let mut t = Vec::with_capacity(inputs.len());
            let mut sig = Vec::with_capacity(p_len as usize);
            for r in 0..p_len {
                tuple_at(below, r, &mut t);
                t.push(a);
                t.extend_from_slice(&above);
                sig.push(f(&t));
            }
            sig
        });
        let mut classes: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
        for (a, sig) in here.iter().zip(signatures) {
            classes.entry(sig).or_default().push(*a);
        }
        let family = &inputs[k].family;
        let mut best: Option<(NormValue, Subatom)> = None;
        for class in classes.into_values() {
            let y = Subatom::new(class)?;
            let n = family.norm(&y)?;
            if best.as_ref().is_none_or(|(m, _)| n.gt(m).unwrap_or(false)) {
                best = Some((n, y));
            }
        }
        let (n, y) = best.expect("nonempty subatom");
        let before = family.norm(&ys[k])?;
        let slack = Rational::new(1.into(), (inputs[k].b as i64).into());
        if !n.ge(&before.sub_rational(slack))? {
            return Err(FrameError::LemmaViolation(format!(
                "coordinate {k}: best homogeneous part has norm {n}, more than 1/{} below {before}",
                inputs[k].b
            )));
        }
        ys[k] = y;
    }
    let total = product_len(&ys).expect("shrunk");
    let mut t = Vec::new();
    tuple_at(&ys, 0, &mut t);
    let c0 = f(&t);
    let found = par::find_first(total, |r| {
        let mut t = Vec::new();
        tuple_at(&ys, r, &mut t);
        f(&t) != c0
    });
    if let Some(r) = found {
        return Err(FrameError::LemmaViolation(format!("coloring not constant at product rank {r}")));
    }
    Ok(ys)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval::IndexInterval;
    use crate::subatoms::NmFamily;

    fn nm(len: u32, b: u64) -> FamilyRef {
        Arc::new(NmFamily::unchecked(IndexInterval::new(0, len), b).unwrap())
    }

    #[test]
    fn single_coordinate() {
        let inp = [HomogenizeInput { family: nm(4, 2), subatom: Subatom::full(16), b: 2 }];
        let ys = strong_bigness_homogenize(&inp, &|t| t[0] & 1).unwrap();
        assert_eq!(ys[0].len(), 8);
    }

    #[test]
    fn constant_coloring_keeps_inputs() {
        let inp = [
            HomogenizeInput { family: nm(2, 2), subatom: Subatom::full(4), b: 2 },
            HomogenizeInput { family: nm(2, 2), subatom: Subatom::full(4), b: 5 },
        ];
        let ys = strong_bigness_homogenize(&inp, &|_| 0).unwrap();
        assert_eq!(ys, vec![Subatom::full(4), Subatom::full(4)]);
    }

    #[test]
    fn precondition_on_small_b() {
        let inp = [
            HomogenizeInput { family: nm(2, 2), subatom: Subatom::full(4), b: 2 },
            HomogenizeInput { family: nm(2, 2), subatom: Subatom::full(4), b: 4 },
        ];
        assert!(matches!(strong_bigness_homogenize(&inp, &|_| 0), Err(FrameError::Precondition(_))));
    }
}
