//! Turning a condition below a halved one, with small positive norms, back
//! into one below the original with large norms.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::ops::{glue, restrict_unchecked};
use super::compound_norm;
use crate::exactnum::{NormValue, Rational};
use crate::frame::{
    half_condition, leq_check, poss_included, poss_set, Clause, ConditionPrefix, Frame, FrameError, PossVariant,
    Sublevel, TrunkValue,
};

#[derive(Debug, Clone)]
pub struct UnhalveReport {
    pub h0: u64,
    pub h1: u64,
    pub clauses: Vec<Clause>,
}

impl UnhalveReport {
    pub fn holds(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

fn norms(frame: &Frame, p: &ConditionPrefix) -> Result<Vec<NormValue>, FrameError> {
    p.creatures().iter().map(|c| Ok(compound_norm(frame, c)?.total)).collect()
}

fn extends(long: &TrunkValue, short: &TrunkValue, sacks_top: u64) -> bool {
    match (long, short) {
        (TrunkValue::Sacks(a), TrunkValue::Sacks(b)) => {
            let mask = if sacks_top >= 64 { u64::MAX } else { (1u64 << sacks_top) - 1 };
            a & mask == *b
        }
        (TrunkValue::Subatomic(a), TrunkValue::Subatomic(b)) => a.starts_with(b),
        _ => false,
    }
}

fn sacks_top(frame: &Frame, level: u64) -> Result<u64, FrameError> {
    Ok(if level == 0 { 0 } else { frame.level(level - 1)?.sacks.end() })
}

/// Given `r <= half(q, >= h)` with `min w(r) = h` and positive norms, and
/// norms of `q` at least `m` from `h` on, builds `s <= q` agreeing with `r`
/// from the first `w(r)` point above the last norm dip below `m`.
pub fn unhalve(
    frame: &Frame,
    q: &ConditionPrefix,
    h: u64,
    r: &ConditionPrefix,
    m: &Rational,
) -> Result<(ConditionPrefix, UnhalveReport), FrameError> {
    let qi = q.w().iter().position(|&x| x == h).ok_or_else(|| FrameError::Precondition(format!("{h} is not in w(q)")))?;
    if qi + 1 == q.w().len() {
        return Err(FrameError::Precondition("h is the height of q".into()));
    }
    let nq = norms(frame, q)?;
    for (k, n) in nq.iter().enumerate().skip(qi) {
        if !n.ge_rational(m)? {
            return Err(FrameError::Precondition(format!("norm of q at {} is below M", q.w()[k])));
        }
    }
    if r.w().first() != Some(&h) {
        return Err(FrameError::Precondition("min w(r) must be h".into()));
    }
    let nr = norms(frame, r)?;
    if let Some(k) = nr.iter().position(|n| !n.gt(&NormValue::zero()).unwrap_or(false)) {
        return Err(FrameError::Precondition(format!("norm of r at {} is not positive", r.w()[k])));
    }
    let halved = half_condition(frame, q, h)?;
    if !leq_check(frame, r, &halved)?.holds() {
        return Err(FrameError::Precondition("r is not below half(q, >= h)".into()));
    }
    let mut pos0 = None;
    for i in 1..r.creatures().len() {
        let mut all = true;
        for n in &nr[i..] {
            if !n.gt(&NormValue::rational(m.clone()))? {
                all = false;
                break;
            }
        }
        if all {
            pos0 = Some(i);
            break;
        }
    }
    let pos0 = pos0.ok_or_else(|| FrameError::Precondition("no w(r) point above h from which the norms of r exceed M".into()))?;
    let h0 = r.w()[pos0];
    let h1 = r.w()[pos0 + 1];

    let d0 = glue(frame, &r.creatures()[..=pos0])?;
    let supp_qh = q.creatures()[qi].supp().clone();
    let d1 = restrict_unchecked(&d0, &supp_qh);
    let halving: Vec<Rational> = (h..h1)
        .map(|l| q.halving_at(l).cloned().ok_or(FrameError::BeyondFrame(l)))
        .collect::<Result<_, _>>()?;
    let d = d1.set_halving(halving)?;

    let mut w = vec![h];
    w.extend_from_slice(&r.w()[pos0 + 1..]);
    let mut creatures = vec![d];
    creatures.extend_from_slice(&r.creatures()[pos0 + 1..]);
    let height = *w.last().expect("nonempty");
    let mut trunk = r.trunk().clone();
    for xi in r.supp() {
        let new = creatures.iter().find(|c| c.supp().contains(&xi)).map_or(height, |c| c.m_dn());
        if new > r.trklgth(&xi).expect("in support") {
            trunk.insert(xi, crate::frame::trunk_extended_to(frame, r, &xi, new)?);
        }
    }
    let s = ConditionPrefix::new(w, creatures, trunk, Vec::new())?;
    let ns = norms(frame, &s)?;

    let mut clauses = Vec::with_capacity(7);
    let leq = leq_check(frame, &s, q)?;
    clauses.push(Clause {
        name: "s <= q",
        holds: leq.holds(),
        detail: leq.clauses.iter().filter(|c| !c.holds).map(|c| c.to_string()).collect::<Vec<_>>().join("; "),
    });
    clauses.push(Clause { name: "min w(s) = h", holds: s.w()[0] == h, detail: String::new() });
    let mut large = true;
    for n in &ns[1..] {
        large &= n.ge_rational(m)?;
    }
    clauses.push(Clause { name: "norms >= M from h1 on", holds: large, detail: String::new() });
    clauses.push(Clause { name: "supp(s, h) = supp(q, h)", holds: s.creatures()[0].supp() == &supp_qh, detail: String::new() });
    let same_above = s.w()[1..] == r.w()[pos0 + 1..]
        && s.creatures()[1..] == r.creatures()[pos0 + 1..]
        && s.supp() == r.supp();
    let mut trunks_extend = true;
    let old: &BTreeMap<_, _> = r.trunk();
    for (xi, t) in old {
        let top = sacks_top(frame, r.trklgth(xi).expect("in support"))?;
        trunks_extend &= s.trunk().get(xi).is_some_and(|u| extends(u, t, top));
    }
    clauses.push(Clause {
        name: "agrees with r from h1 on",
        holds: same_above && trunks_extend,
        detail: if same_above { String::new() } else { "creatures or supports differ above h1".into() },
    });
    let mp = &frame.level(h)?.maxposs_below;
    let bound = NormValue::rational(m - Rational::new(1.into(), BigInt::from(mp.clone())));
    clauses.push(Clause { name: "nor(s, h) >= M - 1/maxposs(<h)", holds: ns[0].ge(&bound)?, detail: ns[0].to_string() });
    let u = Sublevel::sacks(h1);
    let included = poss_included(
        &poss_set(frame, &s, u, PossVariant::PerIndex)?,
        &poss_set(frame, r, u, PossVariant::PerIndex)?,
    )?;
    clauses.push(Clause { name: "poss(s, <h1) inside poss(r, <h1)", holds: included, detail: String::new() });
    Ok((s, UnhalveReport { h0, h1, clauses }))
}
