use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{nat_to_rational, primitive_root, rational_log, BigNat, NumError, Rational};

/// Precision used by convenience comparisons.
pub const DEFAULT_PRECISION: u32 = 512;

static COMPARISON_BUDGET: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION);

/// Bits used by the certified comparisons behind `ge`, `try_cmp` and friends.
pub fn comparison_budget() -> u32 {
    COMPARISON_BUDGET.load(AtomicOrdering::Relaxed)
}

/// Sets the process-wide comparison budget (at least 16 bits).
pub fn set_comparison_budget(bits: u32) {
    COMPARISON_BUDGET.store(bits.max(16), AtomicOrdering::Relaxed);
}

/// Largest power (in bits) we are willing to materialize for a cross-power test.
const CROSS_POWER_BITS: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Expr {
    Rational(Rational),
    /// `log_base(arg) / divisor`
    LogQuotient { base: BigNat, arg: BigNat, divisor: Rational },
    /// `max(a - b, 0)`
    Sub(Arc<Expr>, Arc<Expr>),
    Min(Vec<Arc<Expr>>),
    Max(Vec<Arc<Expr>>),
    /// `log2(max(1, x))`
    Log2OfClamped(Arc<Expr>),
    /// `x * factor`, factor positive
    Scaled(Arc<Expr>, Rational),
}

/// A nonnegative real built from logarithmic norm formulas.
///
/// Values are compared with certified dyadic intervals; perfect-power cases
/// are settled exactly by integer cross-powering.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NormValue(Arc<Expr>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Equal,
    Greater,
    Undecided,
}

impl Comparison {
    pub fn ordering(self) -> Option<Ordering> {
        match self {
            Comparison::Less => Some(Ordering::Less),
            Comparison::Equal => Some(Ordering::Equal),
            Comparison::Greater => Some(Ordering::Greater),
            Comparison::Undecided => None,
        }
    }

    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Equal => Comparison::Equal,
            Ordering::Greater => Comparison::Greater,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Comparison::Less => Comparison::Greater,
            Comparison::Greater => Comparison::Less,
            c => c,
        }
    }
}

/// Closed interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    fn rounded(self, prec: u32) -> Self {
        let scale = Rational::from_integer(BigInt::one() << prec);
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Interval { lo, hi }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

fn clamp0(q: Rational) -> Rational {
    if q.is_negative() {
        Rational::zero()
    } else {
        q
    }
}

/// Certified bounds on `log2(n)` for `n >= 1` with `prec` fractional bits.
pub(crate) fn log2_bounds(n: &BigUint, prec: u32) -> (Rational, Rational) {
    assert!(!n.is_zero(), "log2 of zero");
    let k = n.bits() - 1;
    let w = prec as u64 + 16;
    let one_w = BigUint::one() << w;
    let two_w = BigUint::one() << (w + 1);
    // y = n / 2^k scaled by 2^w
    let scaled = n << w;
    let mut ylo = &scaled >> k;
    let mut yhi = if (&ylo << k) == scaled { ylo.clone() } else { &ylo + 1u32 };
    let mut lo_bits = BigUint::zero();
    let mut hi_bits = BigUint::zero();
    for _ in 0..prec {
        lo_bits <<= 1;
        hi_bits <<= 1;
        ylo = (&ylo * &ylo) >> w;
        if ylo >= two_w {
            lo_bits += 1u32;
            ylo >>= 1;
        }
        let sq = &yhi * &yhi;
        let mut next = &sq >> w;
        if (&next << w) != sq {
            next += 1u32;
        }
        yhi = next;
        if yhi >= two_w {
            hi_bits += 1u32;
            let odd = yhi.bit(0);
            yhi >>= 1;
            if odd {
                yhi += 1u32;
            }
        }
        if ylo < one_w {
            ylo = one_w.clone();
        }
    }
    let denom = BigInt::one() << prec;
    let kq = Rational::from_integer(BigInt::from(k));
    let lo = &kq + Rational::new(BigInt::from(lo_bits), denom.clone());
    let hi = &kq + Rational::new(BigInt::from(hi_bits) + 1, denom);
    (lo, hi)
}

/// Recognizes `log2(max(1, x)) * f` with exact `x`.
fn as_scaled_log2(e: &Expr) -> Option<(Rational, Rational)> {
    match e {
        Expr::Log2OfClamped(x) => Some((x.exact()?, Rational::one())),
        Expr::Scaled(inner, f) => {
            let (x, g) = as_scaled_log2(inner)?;
            Some((x, g * f))
        }
        _ => None,
    }
}

/// Exact value of `(log2 x - log2 y)+ * f` when `x / y` is a power of two.
fn log2_difference(a: &Expr, b: &Expr) -> Option<Rational> {
    let (x, f) = as_scaled_log2(a)?;
    let (y, g) = as_scaled_log2(b)?;
    if f != g {
        return None;
    }
    let one = Rational::one();
    let x = if x < one { one.clone() } else { x };
    let y = if y < one { one.clone() } else { y };
    let r = x / y;
    if r <= one {
        return Some(Rational::zero());
    }
    let n = r.numer().to_biguint()?;
    let d = r.denom().to_biguint()?;
    if !d.is_one() || !super::is_power_of_two(&n) {
        return None;
    }
    Some(Rational::from_integer(BigInt::from(n.bits() - 1)) * f)
}

/// Bounds on `log2(q)` for rational `q >= 1`.
fn log2_rational_bounds(q: &Rational, prec: u32) -> (Rational, Rational) {
    if q <= &Rational::one() {
        return (Rational::zero(), Rational::zero());
    }
    let num = q.numer().to_biguint().expect("positive");
    let den = q.denom().to_biguint().expect("positive");
    let (nl, nh) = log2_bounds(&num, prec);
    let (dl, dh) = log2_bounds(&den, prec);
    (clamp0(nl - dh), clamp0(nh - dl))
}

/// Precision of the enclosures used to detect values clamped to zero.
const ZERO_TEST_PREC: u32 = 64;

impl Expr {
    fn exact(&self) -> Option<Rational> {
        match self {
            Expr::Rational(q) => Some(q.clone()),
            Expr::LogQuotient { base, arg, divisor } => rational_log(base, arg).map(|l| l / divisor),
            Expr::Sub(a, b) => {
                if let (Some(x), Some(y)) = (a.exact(), b.exact()) {
                    return Some(clamp0(x - y));
                }
                // provably clamped
                if a.interval(ZERO_TEST_PREC).hi <= b.interval(ZERO_TEST_PREC).lo {
                    return Some(Rational::zero());
                }
                log2_difference(a, b)
            }
            Expr::Min(xs) => {
                let vals: Option<Vec<_>> = xs.iter().map(|x| x.exact()).collect();
                vals?.into_iter().min()
            }
            Expr::Max(xs) => {
                let vals: Option<Vec<_>> = xs.iter().map(|x| x.exact()).collect();
                vals?.into_iter().max()
            }
            Expr::Log2OfClamped(x) => {
                let Some(v) = x.exact() else {
                    return (x.interval(ZERO_TEST_PREC).hi <= Rational::one()).then(Rational::zero);
                };
                if v <= Rational::one() {
                    return Some(Rational::zero());
                }
                if !v.denom().is_one() {
                    // log2 of a non-integer rational > 1 is rational only for powers of 2
                    let d = v.denom().to_biguint()?;
                    let n = v.numer().to_biguint()?;
                    if super::is_power_of_two(&d) && super::is_power_of_two(&n) {
                        return Some(Rational::from_integer(
                            BigInt::from(n.bits()) - BigInt::from(d.bits()),
                        ));
                    }
                    return None;
                }
                let n = v.numer().to_biguint()?;
                rational_log(&BigUint::from(2u32), &n)
            }
            Expr::Scaled(x, f) => Some(x.exact()? * f),
        }
    }

    fn interval(&self, prec: u32) -> Interval {
        if let Some(q) = self.exact() {
            return Interval::point(q);
        }
        let iv = match self {
            Expr::Rational(q) => Interval::point(q.clone()),
            Expr::LogQuotient { base, arg, divisor } => {
                let (ml, mh) = log2_bounds(arg, prec + 8);
                let (bl, bh) = log2_bounds(base, prec + 8);
                Interval { lo: ml / (bh * divisor), hi: mh / (bl * divisor) }
            }
            Expr::Sub(a, b) => {
                let ia = a.interval(prec);
                let ib = b.interval(prec);
                Interval { lo: clamp0(&ia.lo - &ib.hi), hi: clamp0(&ia.hi - &ib.lo) }
            }
            Expr::Min(xs) => {
                let ivs: Vec<_> = xs.iter().map(|x| x.interval(prec)).collect();
                Interval {
                    lo: ivs.iter().map(|i| i.lo.clone()).min().unwrap_or_default(),
                    hi: ivs.iter().map(|i| i.hi.clone()).min().unwrap_or_default(),
                }
            }
            Expr::Max(xs) => {
                let ivs: Vec<_> = xs.iter().map(|x| x.interval(prec)).collect();
                Interval {
                    lo: ivs.iter().map(|i| i.lo.clone()).max().unwrap_or_default(),
                    hi: ivs.iter().map(|i| i.hi.clone()).max().unwrap_or_default(),
                }
            }
            Expr::Log2OfClamped(x) => {
                let ix = x.interval(prec + 4);
                let one = Rational::one();
                let lo = if ix.lo <= one { Rational::zero() } else { log2_rational_bounds(&ix.lo, prec + 8).0 };
                let hi = if ix.hi <= one { Rational::zero() } else { log2_rational_bounds(&ix.hi, prec + 8).1 };
                Interval { lo: clamp0(lo), hi }
            }
            Expr::Scaled(x, f) => {
                let ix = x.interval(prec + 4);
                Interval { lo: ix.lo * f, hi: ix.hi * f }
            }
        };
        iv.rounded(prec)
    }

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rational(q) => write!(f, "{q}"),
            Expr::LogQuotient { base, arg, divisor } => {
                if divisor.is_one() {
                    write!(f, "log_{base}({arg})")
                } else {
                    write!(f, "log_{base}({arg})/{divisor}")
                }
            }
            Expr::Sub(a, b) => {
                write!(f, "(")?;
                a.render(f)?;
                write!(f, " - ")?;
                b.render(f)?;
                write!(f, ")+")
            }
            Expr::Min(xs) | Expr::Max(xs) => {
                write!(f, "{}(", if matches!(self, Expr::Min(_)) { "min" } else { "max" })?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    x.render(f)?;
                }
                write!(f, ")")
            }
            Expr::Log2OfClamped(x) => {
                write!(f, "log2(max(1, ")?;
                x.render(f)?;
                write!(f, "))")
            }
            Expr::Scaled(x, k) => {
                write!(f, "(")?;
                x.render(f)?;
                write!(f, ")*{k}")
            }
        }
    }
}

impl NormValue {
    /// A rational value; negatives clamp to zero.
    pub fn rational(q: Rational) -> Self {
        NormValue(Arc::new(Expr::Rational(clamp0(q))))
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Rational::from_integer(n.into()))
    }

    pub fn from_nat(n: &BigNat) -> Self {
        Self::rational(nat_to_rational(n))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    /// `log_base(arg) / divisor`.
    pub fn log_quotient(base: BigNat, arg: BigNat, divisor: Rational) -> Result<Self, NumError> {
        if base < BigNat::from(2u32) {
            return Err(NumError::BadLogBase);
        }
        if arg.is_zero() {
            return Err(NumError::BadLogArgument);
        }
        if !divisor.is_positive() {
            return Err(NumError::NonPositiveDivisor);
        }
        Ok(NormValue(Arc::new(Expr::LogQuotient { base, arg, divisor })))
    }

    /// `log_base(max(arg, 1)) / divisor` for machine-sized inputs.
    pub fn log_quotient_u64(base: u64, arg: u64, divisor: Rational) -> Self {
        Self::log_quotient(BigNat::from(base), BigNat::from(arg.max(1)), divisor)
            .expect("valid log quotient")
    }

    /// `max(self - other, 0)`.
    pub fn sub(&self, other: &NormValue) -> Self {
        NormValue(Arc::new(Expr::Sub(self.0.clone(), other.0.clone())))
    }

    /// `max(self - q, 0)` for a rational `q`.
    pub fn sub_rational(&self, q: Rational) -> Self {
        self.sub(&NormValue::rational(q))
    }

    pub fn min_of<I: IntoIterator<Item = NormValue>>(items: I) -> Option<Self> {
        let xs: Vec<_> = items.into_iter().map(|v| v.0).collect();
        match xs.len() {
            0 => None,
            1 => Some(NormValue(xs.into_iter().next().unwrap())),
            _ => Some(NormValue(Arc::new(Expr::Min(xs)))),
        }
    }

    pub fn max_of<I: IntoIterator<Item = NormValue>>(items: I) -> Option<Self> {
        let xs: Vec<_> = items.into_iter().map(|v| v.0).collect();
        match xs.len() {
            0 => None,
            1 => Some(NormValue(xs.into_iter().next().unwrap())),
            _ => Some(NormValue(Arc::new(Expr::Max(xs)))),
        }
    }

    /// `log2(max(1, self))`.
    pub fn log2_clamped(&self) -> Self {
        NormValue(Arc::new(Expr::Log2OfClamped(self.0.clone())))
    }

    /// Multiplies by a positive rational.
    pub fn scale(&self, factor: Rational) -> Self {
        assert!(factor.is_positive(), "scale factor must be positive");
        if factor.is_one() {
            return self.clone();
        }
        NormValue(Arc::new(Expr::Scaled(self.0.clone(), factor)))
    }

    /// The exact value when it is rational and provably so.
    pub fn exact(&self) -> Option<Rational> {
        self.0.exact()
    }

    /// Certified enclosure with endpoints on the `2^-prec` grid.
    pub fn interval(&self, prec: u32) -> Interval {
        self.0.interval(prec)
    }

    /// Midpoint approximation for display.
    pub fn approx(&self) -> f64 {
        let iv = self.interval(64);
        ((iv.lo + iv.hi) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
    }

    /// Dyadic lower bound of the value at the given precision.
    pub fn lower_bound(&self, prec: u32) -> Rational {
        self.interval(prec).lo
    }

    /// Certified three-way comparison using at most `budget` bits.
    pub fn compare(&self, other: &NormValue, budget: u32) -> Comparison {
        let budget = budget.max(16);
        if self.0 == other.0 {
            return Comparison::Equal;
        }
        let ea = self.exact();
        let eb = other.exact();
        if let (Some(a), Some(b)) = (&ea, &eb) {
            return Comparison::from_ordering(a.cmp(b));
        }
        if let (Some(a), Some(b)) = (affine(&self.0), affine(&other.0)) {
            if let Some(d) = a.minus(&b) {
                if let Some(o) = d.sign() {
                    return Comparison::from_ordering(o);
                }
            }
        }
        let mut prec = 32u32.min(budget);
        loop {
            let ia = self.interval(prec);
            let ib = other.interval(prec);
            if ia.hi < ib.lo {
                return Comparison::Less;
            }
            if ia.lo > ib.hi {
                return Comparison::Greater;
            }
            if prec >= budget {
                return Comparison::Undecided;
            }
            prec = (prec * 2).min(budget);
        }
    }

    /// `self >= other`, failing when undecided at `budget` bits.
    pub fn ge_within(&self, other: &NormValue, budget: u32) -> Result<bool, NumError> {
        match self.compare(other, budget) {
            Comparison::Undecided => Err(NumError::Undecided(budget)),
            c => Ok(c != Comparison::Less),
        }
    }

    pub fn ge(&self, other: &NormValue) -> Result<bool, NumError> {
        self.ge_within(other, comparison_budget())
    }

    pub fn gt(&self, other: &NormValue) -> Result<bool, NumError> {
        Ok(!other.ge(self)?)
    }

    pub fn le(&self, other: &NormValue) -> Result<bool, NumError> {
        other.ge(self)
    }

    pub fn ge_rational(&self, q: &Rational) -> Result<bool, NumError> {
        self.ge(&NormValue::rational(q.clone()))
    }

    /// Ordering for sorting; undecided pairs are an error.
    pub fn try_cmp(&self, other: &NormValue) -> Result<Ordering, NumError> {
        let budget = comparison_budget();
        self.compare(other, budget).ordering().ok_or(NumError::Undecided(budget))
    }

    /// Maximum of a nonempty list under certified comparison.
    pub fn try_max(items: &[NormValue]) -> Result<Option<NormValue>, NumError> {
        let mut best: Option<&NormValue> = None;
        for v in items {
            best = match best {
                None => Some(v),
                Some(b) if v.try_cmp(b)? == Ordering::Greater => Some(v),
                keep => keep,
            };
        }
        Ok(best.cloned())
    }

    /// Minimum of a nonempty list under certified comparison.
    pub fn try_min(items: &[NormValue]) -> Result<Option<NormValue>, NumError> {
        let mut best: Option<&NormValue> = None;
        for v in items {
            best = match best {
                None => Some(v),
                Some(b) if v.try_cmp(b)? == Ordering::Less => Some(v),
                keep => keep,
            };
        }
        Ok(best.cloned())
    }
}

/// `constant + sum coeff * log_root(arg)`, the unclamped value of an expression
/// whose logarithms share one base up to perfect powers.
#[derive(Debug, Clone)]
struct Affine {
    root: Option<BigNat>,
    terms: BTreeMap<BigNat, Rational>,
    constant: Rational,
}

impl Affine {
    fn constant(q: Rational) -> Self {
        Affine { root: None, terms: BTreeMap::new(), constant: q }
    }

    fn log_term(root: BigNat, arg: BigNat, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !arg.is_one() && !coeff.is_zero() {
            terms.insert(arg, coeff);
        }
        Affine { root: Some(root), terms, constant: Rational::zero() }
    }

    fn scaled(&self, f: &Rational) -> Self {
        Affine {
            root: self.root.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * f)).collect(),
            constant: &self.constant * f,
        }
    }

    fn combine(&self, other: &Affine, sign: i32) -> Option<Affine> {
        let root = match (&self.root, &other.root) {
            (Some(a), Some(b)) if a != b => {
                if !self.terms.is_empty() && !other.terms.is_empty() {
                    return None;
                }
                if self.terms.is_empty() {
                    Some(b.clone())
                } else {
                    Some(a.clone())
                }
            }
            (Some(a), _) => Some(a.clone()),
            (_, b) => b.clone(),
        };
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            let e = terms.entry(k.clone()).or_insert_with(Rational::zero);
            if sign > 0 {
                *e += v;
            } else {
                *e -= v;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        let constant = if sign > 0 { &self.constant + &other.constant } else { &self.constant - &other.constant };
        Some(Affine { root, terms, constant })
    }

    fn minus(&self, other: &Affine) -> Option<Affine> {
        self.combine(other, -1)
    }

    /// Exact sign by integer cross-powering.
    fn sign(&self) -> Option<Ordering> {
        if self.terms.is_empty() {
            return Some(self.constant.cmp(&Rational::zero()));
        }
        let root = self.root.as_ref()?;
        let mut lcm = self.constant.denom().clone();
        for v in self.terms.values() {
            lcm = num_integer::Integer::lcm(&lcm, v.denom());
        }
        let l = Rational::from_integer(lcm);
        let mut pos = BigUint::one();
        let mut neg = BigUint::one();
        let mut cost: u64 = 0;
        let mut push = |base: &BigUint, e: &BigInt, pos: &mut BigUint, neg: &mut BigUint| -> Option<()> {
            let mag = e.magnitude().to_u32()?;
            cost = cost.checked_add(base.bits().checked_mul(mag as u64)?)?;
            if cost > CROSS_POWER_BITS {
                return None;
            }
            if e.is_positive() {
                *pos *= base.pow(mag);
            } else if e.is_negative() {
                *neg *= base.pow(mag);
            }
            Some(())
        };
        for (arg, v) in &self.terms {
            let e = (v * &l).to_integer();
            push(arg, &e, &mut pos, &mut neg)?;
        }
        let c = (&self.constant * &l).to_integer();
        push(root, &c, &mut pos, &mut neg)?;
        Some(pos.cmp(&neg))
    }
}

fn affine(e: &Expr) -> Option<Affine> {
    match e {
        Expr::Rational(q) => Some(Affine::constant(q.clone())),
        Expr::LogQuotient { base, arg, divisor } => {
            let (r, s) = primitive_root(base);
            let coeff = Rational::one() / (Rational::from_integer(BigInt::from(s)) * divisor);
            Some(Affine::log_term(r, arg.clone(), coeff))
        }
        Expr::Sub(a, b) => {
            let d = affine(a)?.minus(&affine(b)?)?;
            match d.sign()? {
                Ordering::Less => Some(Affine::constant(Rational::zero())),
                _ => Some(d),
            }
        }
        Expr::Min(xs) | Expr::Max(xs) => {
            let want = if matches!(e, Expr::Min(_)) { Ordering::Less } else { Ordering::Greater };
            let mut best: Option<Affine> = None;
            for x in xs {
                let a = affine(x)?;
                best = Some(match best {
                    None => a,
                    Some(b) => {
                        if a.minus(&b)?.sign()? == want {
                            a
                        } else {
                            b
                        }
                    }
                });
            }
            best
        }
        Expr::Log2OfClamped(x) => {
            let v = x.exact()?;
            if v <= Rational::one() {
                return Some(Affine::constant(Rational::zero()));
            }
            let two = BigUint::from(2u32);
            let num = Affine::log_term(two.clone(), v.numer().to_biguint()?, Rational::one());
            let den = Affine::log_term(two, v.denom().to_biguint()?, Rational::one());
            num.minus(&den)
        }
        Expr::Scaled(x, f) => Some(affine(x)?.scaled(f)),
    }
}

impl fmt::Debug for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormValue(")?;
        self.0.render(f)?;
        write!(f, ")")
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.render(f)?;
        write!(f, " ~ {:.6}", self.approx())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    fn lq(b: u64, m: u64, d: i64) -> NormValue {
        NormValue::log_quotient_u64(b, m, ratio(d, 1))
    }

    #[test]
    fn spec_examples() {
        assert_eq!(lq(3, 9, 2).compare(&NormValue::from_int(1), 64), Comparison::Equal);
        assert_eq!(lq(2, 9, 2).compare(&NormValue::frac(3, 2), 64), Comparison::Greater);
        assert_eq!(NormValue::zero().compare(&lq(2, 1, 5), 64), Comparison::Equal);
    }

    #[test]
    fn log2_bounds_bracket() {
        for n in 1u64..300 {
            let (lo, hi) = log2_bounds(&BigUint::from(n), 40);
            let x = (n as f64).log2();
            assert!(lo.to_f64().unwrap() <= x + 1e-12 && x <= hi.to_f64().unwrap() + 1e-12, "n={n}");
            assert!((hi - lo).to_f64().unwrap() < 1e-10);
        }
    }

    #[test]
    fn mixed_bases_decided() {
        // log3(2) ~ 0.6309 < log2(3)/2 ~ 0.7925
        let a = lq(3, 2, 1);
        let b = lq(2, 3, 2);
        assert_eq!(a.compare(&b, 64), Comparison::Less);
    }

    #[test]
    fn sub_clamps_at_zero() {
        let v = NormValue::from_int(1).sub(&NormValue::from_int(3));
        assert_eq!(v.exact(), Some(Rational::zero()));
    }

    #[test]
    fn log2_clamped_of_half_integer() {
        let v = NormValue::frac(9, 2).log2_clamped();
        let w = NormValue::from_int(9).log2_clamped();
        assert_eq!(w.sub(&v).compare(&NormValue::from_int(1), 128), Comparison::Equal);
    }

    #[test]
    fn pigeonhole_knife_edge_is_decided() {
        // log_3(2)/3 vs log_3(6)/3 - 1/3 are equal irrationals
        let class = NormValue::log_quotient_u64(3, 2, ratio(3, 1));
        let whole = NormValue::log_quotient_u64(3, 6, ratio(3, 1)).sub(&NormValue::frac(1, 3));
        assert_eq!(class.compare(&whole, 64), Comparison::Equal);
        let smaller = NormValue::log_quotient_u64(3, 5, ratio(3, 1)).sub(&NormValue::frac(1, 3));
        assert_eq!(class.compare(&smaller, 64), Comparison::Greater);
    }

    #[test]
    fn same_base_cross_power() {
        // log2(9)/2 vs log2(3): equal in value
        let a = lq(2, 9, 2);
        let b = lq(2, 3, 1);
        assert_eq!(a.compare(&b, 64), Comparison::Equal);
    }
}
