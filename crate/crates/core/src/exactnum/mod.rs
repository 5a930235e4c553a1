//! Exact arithmetic: big naturals, rationals, tower-size descriptors and
//! certified norm values.

mod norm;
mod size;

pub use norm::{comparison_budget, set_comparison_budget, Comparison, Interval, NormValue, DEFAULT_PRECISION};
pub use size::{SizeDescriptor, DEFAULT_BIT_BUDGET};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision natural number.
pub type BigNat = BigUint;

/// Exact nonnegative or signed rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("binomial({n}, {k}) undefined: k exceeds n")]
    BinomialDomain { n: BigNat, k: BigNat },
    #[error("logarithm base must be at least 2")]
    BadLogBase,
    #[error("logarithm argument must be at least 1")]
    BadLogArgument,
    #[error("divisor must be positive")]
    NonPositiveDivisor,
    #[error("comparison undecided at {0} bits of precision")]
    Undecided(u32),
    #[error("value exceeds the exact bit budget")]
    BudgetExceeded,
}

/// Exact binomial coefficient. Fails when `k > n`.
pub fn binomial(n: &BigNat, k: &BigNat) -> Result<BigNat, NumError> {
    if k > n {
        return Err(NumError::BinomialDomain { n: n.clone(), k: k.clone() });
    }
    let nk = n - k;
    let k = if &nk < k { nk } else { k.clone() };
    let mut acc = BigNat::one();
    let mut i = BigNat::zero();
    while i < k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc *= n - &i;
        i += 1u32;
        acc /= &i;
    }
    Ok(acc)
}

/// Binomial coefficient for machine-sized arguments.
pub fn binomial_u64(n: u64, k: u64) -> Result<BigNat, NumError> {
    binomial(&BigNat::from(n), &BigNat::from(k))
}

/// Largest `e` with `base^e <= n`. Requires `base >= 2` and `n >= 1`.
pub fn ilog_floor(base: &BigNat, n: &BigNat) -> Result<u64, NumError> {
    if base < &BigNat::from(2u32) {
        return Err(NumError::BadLogBase);
    }
    if n.is_zero() {
        return Err(NumError::BadLogArgument);
    }
    // start from a bit-length estimate and correct
    let mut e = (n.bits() - 1) / base.bits().max(1);
    let mut p = base.pow(e as u32);
    while &(&p * base) <= n {
        p *= base;
        e += 1;
    }
    while &p > n {
        p /= base;
        e -= 1;
    }
    Ok(e)
}

/// If `n = r^s` with `r` not itself a perfect power, returns `(r, s)`.
pub fn primitive_root(n: &BigNat) -> (BigNat, u32) {
    if n <= &BigNat::one() {
        return (n.clone(), 1);
    }
    let bits = n.bits() as u32;
    for s in (2..=bits).rev() {
        let r = n.nth_root(s);
        if &r.pow(s) == n && r > BigNat::one() {
            let (rr, t) = primitive_root(&r);
            return (rr, t * s);
        }
    }
    (n.clone(), 1)
}

/// Exact `log_base(arg)` when it is rational.
pub fn rational_log(base: &BigNat, arg: &BigNat) -> Option<Rational> {
    if arg.is_one() {
        return Some(Rational::zero());
    }
    let (r, s) = primitive_root(base);
    let (r2, t) = primitive_root(arg);
    if r == r2 {
        Some(Rational::new(t.into(), s.into()))
    } else {
        None
    }
}

/// Converts a natural to the signed rational type.
pub fn nat_to_rational(n: &BigNat) -> Rational {
    Rational::from_integer(n.clone().into())
}

/// Integer ceiling of a nonnegative rational.
pub fn rational_ceil(q: &Rational) -> BigNat {
    let c = q.ceil().to_integer();
    c.to_biguint().unwrap_or_default()
}

/// Integer floor of a nonnegative rational.
pub fn rational_floor(q: &Rational) -> BigNat {
    let f = q.floor().to_integer();
    f.to_biguint().unwrap_or_default()
}

/// Best-effort decimal rendering for reports.
pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `gcd`-reduced rational from two machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// True when `n` is a power of two.
pub fn is_power_of_two(n: &BigNat) -> bool {
    !n.is_zero() && (n & (n - 1u32)).is_zero()
}

/// Ceiling of `a / b` on naturals.
pub fn div_ceil(a: &BigNat, b: &BigNat) -> BigNat {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_u64(8, 2).unwrap(), BigNat::from(28u32));
        assert_eq!(binomial_u64(16, 2).unwrap(), BigNat::from(120u32));
        assert_eq!(binomial_u64(9, 0).unwrap(), BigNat::one());
        assert!(matches!(binomial_u64(2, 3), Err(NumError::BinomialDomain { .. })));
    }

    #[test]
    fn pascal_recurrence_up_to_64() {
        for n in 1..=64u64 {
            for k in 1..n {
                let lhs = binomial_u64(n, k).unwrap();
                let rhs = binomial_u64(n - 1, k - 1).unwrap() + binomial_u64(n - 1, k).unwrap();
                assert_eq!(lhs, rhs, "C({n},{k})");
            }
        }
    }

    #[test]
    fn ilog_floor_matches_powers() {
        let three = BigNat::from(3u32);
        assert_eq!(ilog_floor(&three, &BigNat::from(26u32)).unwrap(), 2);
        assert_eq!(ilog_floor(&three, &BigNat::from(27u32)).unwrap(), 3);
        assert_eq!(ilog_floor(&three, &BigNat::one()).unwrap(), 0);
    }

    #[test]
    fn rational_logs() {
        let b = BigNat::from(8u32);
        assert_eq!(rational_log(&b, &BigNat::from(4u32)), Some(ratio(2, 3)));
        assert_eq!(rational_log(&BigNat::from(2u32), &BigNat::from(9u32)), None);
        assert_eq!(rational_log(&BigNat::from(3u32), &BigNat::from(9u32)), Some(ratio(2, 1)));
    }
}
