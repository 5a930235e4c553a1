use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::hitting::{min_hitting_set, unrank_subset};
use super::{FamilyKind, FamilyRef, Subatom, SubatomError, SubatomicFamily};
use crate::counting::{ceil_reciprocal, eps_cap, LognorSpec};
use crate::exactnum::{binomial_u64, BigNat, NormValue, Rational, SizeDescriptor, DEFAULT_BIT_BUDGET};
use crate::interval::IndexInterval;

fn b_pow_b_squared(b: u64) -> BigNat {
    BigNat::from(b).pow((b * b) as u32)
}

/// Minimal `|I|` with `2^|I| > b^(b^2)`.
pub fn nm_minimal_len(b: u64) -> u32 {
    b_pow_b_squared(b).bits() as u32
}

/// Minimal `|I| > b` with `2^(|I|-b) + 1 > b^(b^2)`.
pub fn nn_minimal_len(b: u64) -> u32 {
    let target = b_pow_b_squared(b);
    // 2^(L-b) >= target
    let mut e = target.bits() as u32;
    if e > 0 && (BigNat::one() << (e - 1)) >= target {
        e -= 1;
    }
    (b as u32 + e).max(b as u32 + 1)
}

/// Minimal `|I|` (searched up to `cap`) meeting the counting family requirement.
pub fn cn_minimal_len(min_i: u64, b: u32, cap: u32) -> Option<u32> {
    (b + 1..=cap).find(|&len| CnFamily::requirement_holds(min_i, len, b).unwrap_or(false))
}

/// `POSS = 2^I`; subatoms are nonempty subsets; `nor(x) = log_b |x| / b`.
///
/// A possibility is a function `I -> 2`, encoded by the bitmask of its values.
#[derive(Debug, Clone)]
pub struct NmFamily {
    pub interval: IndexInterval,
    pub b: u64,
    requirement: bool,
}

impl NmFamily {
    /// Checked constructor: fails unless `nor(POSS) > b`.
    pub fn new(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        let fam = Self::unchecked(interval, b)?;
        if !fam.requirement {
            return Err(SubatomError::Requirement {
                kind: FamilyKind::Nm,
                len: interval.len,
                b,
                min_len: nm_minimal_len(b).to_string(),
            });
        }
        Ok(fam)
    }

    /// Constructor for small stand-in instances that skips the size requirement.
    pub fn unchecked(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        if b < 2 {
            return Err(SubatomError::Precondition("nm family needs b >= 2".into()));
        }
        let requirement = (BigNat::one() << interval.len) > b_pow_b_squared(b);
        Ok(NmFamily { interval, b, requirement })
    }
}

impl SubatomicFamily for NmFamily {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Nm
    }
    fn b(&self) -> u64 {
        self.b
    }
    fn poss_count(&self) -> BigNat {
        BigNat::one() << self.interval.len
    }
    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError> {
        Ok(NormValue::log_quotient(
            BigNat::from(self.b),
            BigNat::from(x.len()),
            Rational::from_integer(BigInt::from(self.b)),
        )?)
    }
    fn h_prime(&self) -> SizeDescriptor {
        SizeDescriptor::pow2(&SizeDescriptor::exact(self.interval.max() + 1), DEFAULT_BIT_BUDGET)
    }
    fn counting(&self) -> bool {
        true
    }
    fn requirement_met(&self) -> bool {
        self.requirement
    }
}

/// Shared possibility space of the hitting and counting families:
/// subsets of `2^I` of relative size `1 - 2^-b`.
#[derive(Debug, Clone, Copy)]
struct LargeSubsets {
    len: u32,
    b: u32,
}

impl LargeSubsets {
    fn points(&self) -> u64 {
        1u64 << self.len
    }
    /// `|complement(X)| = 2^(|I|-b)`.
    fn hole(&self) -> u64 {
        1u64 << (self.len - self.b)
    }
    fn count(&self) -> BigNat {
        binomial_u64(self.points(), self.hole()).expect("hole <= points")
    }
    /// Bitmask of the possibility with the given index (`|I| <= 6`).
    fn mask(&self, index: u64) -> u64 {
        let n = self.points() as u32;
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        !unrank_subset(n, self.hole() as u32, index as u128) & full
    }
}

/// Hitting-set family: `nor(C) = log_b(nor0(C)) / b`, `nor0` the minimum hitting set.
pub struct NnFamily {
    pub interval: IndexInterval,
    pub b: u64,
    space: LargeSubsets,
    requirement: bool,
    cache: Mutex<HashMap<Subatom, u64>>,
}

impl fmt::Debug for NnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NnFamily").field("interval", &self.interval).field("b", &self.b).finish()
    }
}

/// Result of removing the possibilities that meet a set `E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoveAvoid {
    pub result: Subatom,
    pub nor0_before: u64,
    pub nor0_after: u64,
}

impl NnFamily {
    pub fn new(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        let fam = Self::unchecked(interval, b)?;
        if !fam.requirement {
            return Err(SubatomError::Requirement {
                kind: FamilyKind::Nn,
                len: interval.len,
                b,
                min_len: nn_minimal_len(b).to_string(),
            });
        }
        Ok(fam)
    }

    pub fn unchecked(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        if b < 1 || b as u32 > interval.len {
            return Err(SubatomError::Precondition("nn family needs 1 <= b <= |I|".into()));
        }
        if interval.len > 63 {
            return Err(SubatomError::TooLarge(format!("|I| = {}", interval.len)));
        }
        let space = LargeSubsets { len: interval.len, b: b as u32 };
        let requirement = BigNat::from(space.hole() + 1) > b_pow_b_squared(b);
        Ok(NnFamily { interval, b, space, requirement, cache: Mutex::new(HashMap::new()) })
    }

    /// Number of points of `2^I`.
    pub fn points(&self) -> u64 {
        self.space.points()
    }

    /// Bitmask over `2^I` of the possibility with the given index.
    pub fn possibility_mask(&self, index: u64) -> Result<u64, SubatomError> {
        if self.interval.len > 6 {
            return Err(SubatomError::TooLarge("possibility masks need |I| <= 6".into()));
        }
        Ok(self.space.mask(index))
    }

    fn is_full(&self, c: &Subatom) -> bool {
        BigNat::from(c.len()) == self.space.count()
    }

    /// Minimum size of a set of points meeting every possibility of `c`.
    pub fn nor_zero(&self, c: &Subatom) -> Result<u64, SubatomError> {
        if self.is_full(c) {
            return Ok(self.space.hole() + 1);
        }
        if let Some(&v) = self.cache.lock().expect("cache").get(c) {
            return Ok(v);
        }
        let masks: Result<Vec<u64>, _> = c.poss().iter().map(|&i| self.possibility_mask(i)).collect();
        let bound = (self.space.hole() + 1) as u32;
        let (k, _) = min_hitting_set(&masks?, bound)
            .ok_or_else(|| SubatomError::LemmaViolation("hitting set exceeds structural bound".into()))?;
        self.cache.lock().expect("cache").insert(c.clone(), k as u64);
        Ok(k as u64)
    }

    /// Keeps the possibilities disjoint from `avoid` and checks the norm-drop bounds.
    pub fn remove_avoid(&self, c: &Subatom, avoid: u64) -> Result<RemoveAvoid, SubatomError> {
        let mut kept = Vec::new();
        for &i in c.poss() {
            if self.possibility_mask(i)? & avoid == 0 {
                kept.push(i);
            }
        }
        let result = Subatom::new(kept).map_err(|_| SubatomError::EmptySubatom)?;
        let before = self.nor_zero(c)?;
        let after = self.nor_zero(&result)?;
        let e = avoid.count_ones() as u64;
        if after + e < before {
            return Err(SubatomError::LemmaViolation(format!(
                "nor0 dropped from {before} to {after} removing {e} points"
            )));
        }
        // |E| <= b^nor(C) / 2  <=>  (2|E|)^b <= nor0(C)
        let small = BigNat::from(2 * e).pow(self.b as u32) <= BigNat::from(before);
        if small {
            let drop_ok = self
                .norm(&result)?
                .ge(&self.norm(c)?.sub(&NormValue::log_quotient(
                    BigNat::from(self.b),
                    BigNat::from(2u32),
                    Rational::one(),
                )?))?;
            if !drop_ok {
                return Err(SubatomError::LemmaViolation("norm dropped by more than log_b 2".into()));
            }
        }
        Ok(RemoveAvoid { result, nor0_before: before, nor0_after: after })
    }
}

impl SubatomicFamily for NnFamily {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Nn
    }
    fn b(&self) -> u64 {
        self.b
    }
    fn poss_count(&self) -> BigNat {
        self.space.count()
    }
    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError> {
        let n0 = self.nor_zero(x)?;
        Ok(NormValue::log_quotient(
            BigNat::from(self.b.max(2)),
            BigNat::from(n0.max(1)),
            Rational::from_integer(BigInt::from(self.b)),
        )?)
    }
    fn h_prime(&self) -> SizeDescriptor {
        SizeDescriptor::exact(self.interval.max() + 1)
    }
    fn requirement_met(&self) -> bool {
        self.requirement
    }
}

/// Counting family on the same POSS as [`NnFamily`]:
/// `nor(C) = lognor(nor_cap_b, nor_div_{I,b})(|C|) / (2^min(I) b^2)`.
pub struct CnFamily {
    pub interval: IndexInterval,
    pub b: u64,
    space: LargeSubsets,
    lognor: Arc<LognorSpec>,
    requirement: bool,
}

impl fmt::Debug for CnFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CnFamily").field("interval", &self.interval).field("b", &self.b).finish()
    }
}

impl CnFamily {
    pub fn new(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        let fam = Self::unchecked(interval, b)?;
        if !fam.requirement {
            let min_len = cn_minimal_len(interval.min(), b as u32, 12)
                .map(|l| l.to_string())
                .unwrap_or_else(|| "above 12".into());
            return Err(SubatomError::Requirement { kind: FamilyKind::Cn, len: interval.len, b, min_len });
        }
        Ok(fam)
    }

    pub fn unchecked(interval: IndexInterval, b: u64) -> Result<Self, SubatomError> {
        if b <= 2 || interval.len as u64 <= b {
            return Err(SubatomError::Precondition("cn family needs b > 2 and |I| > b".into()));
        }
        let space = LargeSubsets { len: interval.len, b: b as u32 };
        let lognor = Arc::new(LognorSpec::cap_div(interval.len, b as u32)?);
        let requirement = Self::requirement_holds(interval.min(), interval.len, b as u32)?;
        Ok(CnFamily { interval, b, space, lognor, requirement })
    }

    fn divisor(min_i: u64, b: u64) -> BigNat {
        (BigNat::one() << min_i) * BigNat::from(b * b)
    }

    fn requirement_holds(min_i: u64, len: u32, b: u32) -> Result<bool, SubatomError> {
        if min_i > 64 {
            return Ok(false);
        }
        let space = LargeSubsets { len, b };
        // nor(POSS) > b  <=>  lognor(|POSS|) > b * 2^min(I) * b^2
        let target = Self::divisor(min_i, b as u64) * BigNat::from(b);
        let bound = target.to_u64().unwrap_or(u64::MAX);
        let spec = LognorSpec::cap_div(len, b)?;
        // cheap upper bound first: lognor <= nor_cap
        let cap = crate::counting::nor_cap(b as u64, &space.count())?;
        if cap <= bound {
            return Ok(false);
        }
        Ok(spec.at_least(&space.count(), bound + 1)?)
    }

    /// `lognor(m)` for this family's component norms.
    pub fn lognor(&self, m: &BigNat) -> Result<u64, SubatomError> {
        Ok(self.lognor.lognor(m)?)
    }

    /// Norm as a function of `|C|` alone.
    pub fn norm_of_size(&self, size: &BigNat) -> Result<NormValue, SubatomError> {
        let l = self.lognor(size)?;
        let d = Self::divisor(self.interval.min(), self.b);
        Ok(NormValue::rational(Rational::new(BigInt::from(l), d.into())))
    }
}

impl SubatomicFamily for CnFamily {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Cn
    }
    fn b(&self) -> u64 {
        self.b
    }
    fn poss_count(&self) -> BigNat {
        self.space.count()
    }
    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError> {
        self.norm_of_size(&BigNat::from(x.len()))
    }
    fn counting(&self) -> bool {
        true
    }
    fn h_prime(&self) -> SizeDescriptor {
        let poss = self.space.count();
        let h0 = SizeDescriptor::pow2(&SizeDescriptor::Exact(poss.clone()), DEFAULT_BIT_BUDGET);
        // 1/eps(1/b, |POSS|) = b * 2^(2b|POSS| + 2)
        let h1 = match poss.to_u64() {
            Some(p) if p < 1 << 16 => SizeDescriptor::Exact(ceil_reciprocal(&eps_cap(self.b, p))),
            _ => SizeDescriptor::power(
                &BigNat::from(2u32),
                &SizeDescriptor::Exact(poss * (2 * self.b) + 2u32),
                &BigNat::from(self.b),
                DEFAULT_BIT_BUDGET,
            ),
        };
        match h0.compare(&h1) {
            Some(std::cmp::Ordering::Greater) => h0,
            _ => h1,
        }
    }
    fn requirement_met(&self) -> bool {
        self.requirement
    }
}

/// Abstract counting family: `nor(x) = log_base |x| / divisor` on `POSS = 0..n`.
#[derive(Debug, Clone)]
pub struct CountingFamily {
    pub poss: u64,
    pub base: u64,
    pub divisor: Rational,
}

impl CountingFamily {
    pub fn new(poss: u64, base: u64, divisor: Rational) -> Result<Self, SubatomError> {
        if poss == 0 || base < 2 || divisor <= Rational::zero() {
            return Err(SubatomError::Precondition("counting family needs POSS, base >= 2, divisor > 0".into()));
        }
        Ok(CountingFamily { poss, base, divisor })
    }
}

impl SubatomicFamily for CountingFamily {
    fn kind(&self) -> FamilyKind {
        FamilyKind::Counting
    }
    fn b(&self) -> u64 {
        self.base
    }
    fn poss_count(&self) -> BigNat {
        BigNat::from(self.poss)
    }
    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError> {
        Ok(NormValue::log_quotient(BigNat::from(self.base), BigNat::from(x.len()), self.divisor.clone())?)
    }
    fn h_prime(&self) -> SizeDescriptor {
        SizeDescriptor::exact(self.poss + 1)
    }
    fn counting(&self) -> bool {
        true
    }
    fn requirement_met(&self) -> bool {
        let full = Subatom::full(self.poss);
        self.norm(&full)
            .and_then(|v| Ok(v.gt(&NormValue::from_int(self.base as i64))?))
            .unwrap_or(false)
    }
}

/// A family whose norm is divided by `factor`.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub inner: FamilyRef,
    pub factor: u64,
}

/// Divides every norm of `family` by `b`.
pub fn rescale_norm(family: FamilyRef, b: u64) -> Rescaled {
    assert!(b >= 1, "rescale factor must be positive");
    Rescaled { inner: family, factor: b }
}

impl SubatomicFamily for Rescaled {
    fn kind(&self) -> FamilyKind {
        self.inner.kind()
    }
    fn b(&self) -> u64 {
        self.inner.b()
    }
    fn poss_count(&self) -> BigNat {
        self.inner.poss_count()
    }
    fn norm(&self, x: &Subatom) -> Result<NormValue, SubatomError> {
        Ok(self.inner.norm(x)?.scale(Rational::new(BigInt::one(), BigInt::from(self.factor))))
    }
    fn h_prime(&self) -> SizeDescriptor {
        self.inner.h_prime()
    }
    fn requirement_met(&self) -> bool {
        self.full()
            .and_then(|f| Ok(self.norm(&f)?.gt(&NormValue::from_int(self.b() as i64))?))
            .unwrap_or(false)
    }
    fn monotone(&self) -> bool {
        self.inner.monotone()
    }
    fn counting(&self) -> bool {
        self.inner.counting()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn nm_norm_examples() {
        let f = NmFamily::unchecked(IndexInterval::new(0, 3), 2).unwrap();
        let x = Subatom::new([0, 1, 2, 3]).unwrap();
        assert_eq!(f.norm(&x).unwrap().exact(), Some(ratio(1, 1)));
        assert_eq!(f.norm(&Subatom::singleton(5)).unwrap().exact(), Some(ratio(0, 1)));
    }

    #[test]
    fn nm_requirement_and_minimal_len() {
        assert_eq!(nm_minimal_len(2), 5);
        assert!(NmFamily::new(IndexInterval::new(0, 4), 2).is_err());
        let f = NmFamily::new(IndexInterval::new(0, 5), 2).unwrap();
        let full = f.full().unwrap();
        assert!(f.norm(&full).unwrap().gt(&NormValue::from_int(2)).unwrap());
        match NmFamily::new(IndexInterval::new(0, 3), 2) {
            Err(SubatomError::Requirement { min_len, .. }) => assert_eq!(min_len, "5"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nn_full_nor_zero() {
        let f = NnFamily::unchecked(IndexInterval::new(0, 4), 3).unwrap();
        assert_eq!(f.poss_count(), BigNat::from(120u32));
        let full = f.full().unwrap();
        assert_eq!(f.nor_zero(&full).unwrap(), 3);
        // brute-force check of the structural value by the solver
        let masks: Vec<u64> = (0..120).map(|i| f.possibility_mask(i).unwrap()).collect();
        assert_eq!(min_hitting_set(&masks, 3).unwrap().0, 3);
        assert_eq!(f.nor_zero(&Subatom::singleton(7)).unwrap(), 1);
    }

    #[test]
    fn nn_remove_avoid_examples() {
        let f = NnFamily::unchecked(IndexInterval::new(0, 4), 3).unwrap();
        let full = f.full().unwrap();
        let same = f.remove_avoid(&full, 0).unwrap();
        assert_eq!(same.result, full);
        let one = f.remove_avoid(&full, 1).unwrap();
        assert!(one.nor0_after + 1 >= one.nor0_before);
        assert_eq!(f.remove_avoid(&full, 0xFFFF), Err(SubatomError::EmptySubatom));
    }

    #[test]
    fn cn_is_counting_norm() {
        let f = CnFamily::unchecked(IndexInterval::new(0, 4), 3).unwrap();
        assert_eq!(f.poss_count(), BigNat::from(120u32));
        let a = Subatom::new(0..10).unwrap();
        let b = Subatom::new(50..60).unwrap();
        assert_eq!(f.norm(&a).unwrap(), f.norm(&b).unwrap());
        assert_eq!(f.norm(&Subatom::singleton(0)).unwrap().exact(), Some(ratio(0, 1)));
        assert!(!f.requirement_met());
        assert!(CnFamily::unchecked(IndexInterval::new(0, 3), 3).is_err());
    }

    #[test]
    fn rescale_divides_norm() {
        let base: FamilyRef = Arc::new(CountingFamily::new(8, 2, ratio(1, 1)).unwrap());
        let r = rescale_norm(base.clone(), 3);
        let x = Subatom::full(8);
        assert_eq!(r.norm(&x).unwrap().exact(), Some(ratio(1, 1)));
        let id = rescale_norm(base.clone(), 1);
        assert_eq!(id.norm(&x).unwrap().exact(), base.norm(&x).unwrap().exact());
    }
}
