//! Counting norms: the intersection constants, `nor_cap`, `nor_div`, the
//! binomial growth quotient and the `lognor` combinator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{binomial_u64, BigNat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("delta must lie strictly between 0 and 1")]
    DeltaOutOfRange,
    #[error("nor_div needs b > 2 and |I| > b (got |I| = {len}, b = {b})")]
    DivPrecondition { len: u32, b: u32 },
    #[error("b must be at least 2")]
    SmallB,
    #[error("k must be at least 2")]
    SmallK,
    #[error("oracle {which} is not monotone near {at}")]
    NonMonotone { which: usize, at: BigNat },
    #[error("a set has measure below 1/b")]
    LightSet,
}

/// `M(delta, ell) = floor(2 ell / delta) + 1` and `eps = delta / (2 * 2^M)`.
pub fn m_epsilon(delta: &Rational, ell: u64) -> Result<(u64, Rational), CountingError> {
    if delta <= &Rational::zero() || delta >= &Rational::one() {
        return Err(CountingError::DeltaOutOfRange);
    }
    let m = m_value(delta, ell);
    let eps = delta / Rational::from_integer(BigInt::from(2u32) << m);
    Ok((m, eps))
}

fn m_value(delta: &Rational, ell: u64) -> u64 {
    let q = Rational::from_integer(BigInt::from(2 * ell)) / delta;
    q.floor().to_integer().to_u64().expect("M fits in u64") + 1
}

/// `F_b^n`: `F^0 = 1`, `F^{n+1} = M(1/b, F^n) = 2 b F^n + 1`.
pub fn cap_threshold(b: u64, n: u64) -> BigNat {
    let mut f = BigNat::one();
    for _ in 0..n {
        f = f * (2 * b) + 1u32;
    }
    f
}

/// Largest `n` with `m >= F_b^n`; zero for `m = 0`.
pub fn nor_cap(b: u64, m: &BigNat) -> Result<u64, CountingError> {
    if b < 2 {
        return Err(CountingError::SmallB);
    }
    if m.is_zero() {
        return Ok(0);
    }
    let mut n = 0;
    let mut f = BigNat::one();
    loop {
        let next = &f * (2 * b) + 1u32;
        if &next > m {
            return Ok(n);
        }
        f = next;
        n += 1;
    }
}

/// `binomial(2^(|I|-1), 2^(|I|-b))`, the denominator of `nor_div`.
pub fn nor_div_denominator(len: u32, b: u32) -> Result<BigNat, CountingError> {
    if b <= 2 || len <= b {
        return Err(CountingError::DivPrecondition { len, b });
    }
    Ok(binomial_u64(1u64 << (len - 1), 1u64 << (len - b)).expect("k <= n"))
}

/// `floor(m / binomial(2^(|I|-1), 2^(|I|-b)))`.
pub fn nor_div(len: u32, b: u32, m: &BigNat) -> Result<BigNat, CountingError> {
    Ok(m / nor_div_denominator(len, b)?)
}

/// `binomial(2Nk, N) / binomial(Nk, N)`.
pub fn combi_quotient(n: u64, k: u64) -> Result<Rational, CountingError> {
    if k < 2 {
        return Err(CountingError::SmallK);
    }
    let num = binomial_u64(2 * n * k, n).expect("k <= n");
    let den = binomial_u64(n * k, n).expect("k <= n");
    Ok(Rational::new(num.into(), den.into()))
}

/// The elementary lower bound `(2 - 1/k)^N`.
pub fn combi_lower_bound(n: u64, k: u64) -> Rational {
    let base = Rational::new(BigInt::from(2 * k - 1), BigInt::from(k));
    Pow::pow(base, n as u32)
}

/// A monotone norm on naturals.
pub type NormOracle = Arc<dyn Fn(&BigNat) -> u64 + Send + Sync>;

/// `lognor(nor1, nor2)` with a memo of decided `lognor(y) >= m` queries.
pub struct LognorSpec {
    oracles: [NormOracle; 2],
    memo: Mutex<HashMap<(BigNat, u64), bool>>,
}

impl LognorSpec {
    pub fn new(nor1: NormOracle, nor2: NormOracle) -> Self {
        LognorSpec { oracles: [nor1, nor2], memo: Mutex::new(HashMap::new()) }
    }

    /// Both oracles are the identity.
    pub fn identity() -> Self {
        let id: NormOracle = Arc::new(|x: &BigNat| x.to_u64().unwrap_or(u64::MAX));
        Self::new(id.clone(), id)
    }

    /// `lognor(nor_cap_b, nor_div_{I,b})`.
    pub fn cap_div(len: u32, b: u32) -> Result<Self, CountingError> {
        let den = nor_div_denominator(len, b)?;
        let bb = b as u64;
        let cap: NormOracle = Arc::new(move |x: &BigNat| nor_cap(bb, x).expect("b >= 2"));
        let div: NormOracle = Arc::new(move |x: &BigNat| (x / &den).to_u64().unwrap_or(u64::MAX));
        Ok(Self::new(cap, div))
    }

    pub fn nor(&self, i: usize, x: &BigNat) -> u64 {
        (self.oracles[i])(x)
    }

    /// `min { y : nor_i(y) >= target }`, searched in `[0, x]` where `nor_i(x) >= target`.
    fn minimal_witness(&self, i: usize, x: &BigNat, target: u64) -> Result<BigNat, CountingError> {
        let nor = &self.oracles[i];
        if nor(&BigNat::zero()) >= target {
            return Ok(BigNat::zero());
        }
        let (mut lo, mut hi) = (BigNat::zero(), x.clone());
        // invariant: nor(lo) < target <= nor(hi)
        while &hi - &lo > BigNat::one() {
            let mid: BigNat = (&lo + &hi) >> 1;
            if nor(&mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if nor(&lo) >= target || nor(&hi) < target {
            return Err(CountingError::NonMonotone { which: i + 1, at: hi });
        }
        Ok(hi)
    }

    /// Decides `lognor(x) >= m`.
    pub fn at_least(&self, x: &BigNat, m: u64) -> Result<bool, CountingError> {
        if m == 0 {
            return Ok(true);
        }
        if let Some(&v) = self.memo.lock().expect("memo lock").get(&(x.clone(), m)) {
            return Ok(v);
        }
        let result = self.decide(x, m)?;
        self.memo.lock().expect("memo lock").insert((x.clone(), m), result);
        Ok(result)
    }

    fn decide(&self, x: &BigNat, m: u64) -> Result<bool, CountingError> {
        let n = [self.nor(0, x), self.nor(1, x)];
        let half: BigNat = x >> 1;
        for (i, &ni) in n.iter().enumerate() {
            if ni < self.nor(i, &half) || ni < self.nor(i, &BigNat::zero()) {
                return Err(CountingError::NonMonotone { which: i + 1, at: x.clone() });
            }
        }
        if n[0] < m || n[1] < m {
            return Ok(false);
        }
        if !self.at_least(&half, m - 1)? {
            return Ok(false);
        }
        // every y with nor_i(y) >= nor_i(x) - 1 is at least the minimal one,
        // and lognor is monotone, so the minimal witness is the binding case
        for (i, &ni) in n.iter().enumerate() {
            let y = self.minimal_witness(i, x, ni.saturating_sub(1))?;
            if &y != x && !self.at_least(&y, m - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `lognor(x)`.
    pub fn lognor(&self, x: &BigNat) -> Result<u64, CountingError> {
        let mut m = 0;
        while self.at_least(x, m + 1)? {
            m += 1;
        }
        Ok(m)
    }

    pub fn lognor_u64(&self, x: u64) -> Result<u64, CountingError> {
        self.lognor(&BigNat::from(x))
    }
}

/// Witness produced by the intersection counting argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionWitness {
    /// Indices into the input family.
    pub subfamily: Vec<usize>,
    /// Exact measure of the intersection of the chosen sets.
    pub measure: Rational,
    /// `eps(1/b, |A|)`.
    pub eps: Rational,
}

/// Finds `B ⊆ A` with `nor_cap(|B|) >= nor_cap(|A|) - 1` and a large intersection.
///
/// `Ω` is `{0, .., omega-1}` with the uniform measure (`omega <= 64`) and each
/// set is a bitmask of measure at least `1/b`.
pub fn intersection_witness(omega: u32, sets: &[u64], b: u64) -> Result<IntersectionWitness, CountingError> {
    let delta = Rational::new(BigInt::one(), BigInt::from(b));
    let (_, eps) = m_epsilon(&delta, sets.len() as u64)?;
    let measure = |mask: u64| Rational::new(BigInt::from(mask.count_ones()), BigInt::from(omega));
    if sets.iter().any(|&s| measure(s) < delta) {
        return Err(CountingError::LightSet);
    }
    let full = if omega == 64 { u64::MAX } else { (1u64 << omega) - 1 };
    let n = nor_cap(b, &BigNat::from(sets.len() as u64))?;
    if n == 0 {
        let subfamily: Vec<usize> = (0..sets.len().min(1)).collect();
        let inter = subfamily.iter().fold(full, |acc, &i| acc & sets[i]);
        return Ok(IntersectionWitness { subfamily, measure: measure(inter), eps });
    }
    // use F^n sets; points lying in at least F^{n-1} of them carry measure >= delta/2
    let m = cap_threshold(b, n).to_usize().expect("small family");
    let ell = cap_threshold(b, n - 1).to_usize().expect("small family");
    let mut pieces: HashMap<u64, u64> = HashMap::new();
    for x in 0..omega {
        let mut members = 0u64;
        let mut count = 0;
        for (i, &s) in sets.iter().take(m).enumerate() {
            if s >> x & 1 == 1 {
                members |= 1 << i;
                count += 1;
            }
        }
        if count >= ell {
            *pieces.entry(members).or_default() |= 1 << x;
        }
    }
    let (&members, _) = pieces
        .iter()
        .max_by_key(|(&k, &pts)| (pts.count_ones(), std::cmp::Reverse(k)))
        .expect("counting argument guarantees a heavy point");
    let subfamily: Vec<usize> = (0..m).filter(|i| members >> i & 1 == 1).collect();
    let inter = subfamily.iter().fold(full, |acc, &i| acc & sets[i]);
    Ok(IntersectionWitness { subfamily, measure: measure(inter), eps })
}

/// Checks the witness properties claimed by [`intersection_witness`].
pub fn witness_holds(w: &IntersectionWitness, family_size: usize, b: u64) -> bool {
    let na = nor_cap(b, &BigNat::from(family_size as u64)).unwrap_or(0);
    let nb = nor_cap(b, &BigNat::from(w.subfamily.len() as u64)).unwrap_or(0);
    nb + 1 >= na && w.measure >= w.eps
}

/// Lower bound on `nor_div` drop when removing covers of a half-sized set:
/// returns `(norDiv(|C|), norDiv(|D|))`.
pub fn div_drop(len: u32, b: u32, c: u64, d: u64) -> Result<(u64, u64), CountingError> {
    let den = nor_div_denominator(len, b)?;
    let q = |m: u64| (BigNat::from(m) / &den).to_u64().unwrap_or(u64::MAX);
    Ok((q(c), q(d)))
}

/// `eps(1/b, n)` as used for `H'` of the counting family.
pub fn eps_cap(b: u64, n: u64) -> Rational {
    let delta = Rational::new(BigInt::one(), BigInt::from(b));
    m_epsilon(&delta, n).expect("1/b in (0,1)").1
}

/// `ceil(1 / eps)` for a positive rational.
pub fn ceil_reciprocal(eps: &Rational) -> BigNat {
    let r = eps.recip();
    let (q, rem) = r.numer().div_rem(r.denom());
    let q = q.to_biguint().expect("positive");
    if rem.is_zero() {
        q
    } else {
        q + 1u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn m_epsilon_examples() {
        assert_eq!(m_epsilon(&ratio(1, 2), 1).unwrap(), (5, ratio(1, 128)));
        assert_eq!(m_epsilon(&ratio(1, 2), 0).unwrap().0, 1);
        assert!(m_epsilon(&ratio(1, 1), 1).is_err());
    }

    #[test]
    fn nor_cap_examples() {
        assert_eq!(cap_threshold(2, 1), BigNat::from(5u32));
        assert_eq!(cap_threshold(2, 2), BigNat::from(21u32));
        assert_eq!(nor_cap(2, &BigNat::from(4u32)).unwrap(), 0);
        assert_eq!(nor_cap(2, &BigNat::from(5u32)).unwrap(), 1);
        assert_eq!(nor_cap(2, &BigNat::from(21u32)).unwrap(), 2);
    }

    #[test]
    fn nor_div_examples() {
        assert_eq!(nor_div_denominator(4, 3).unwrap(), BigNat::from(28u32));
        assert_eq!(nor_div(4, 3, &BigNat::from(56u32)).unwrap(), BigNat::from(2u32));
        assert_eq!(nor_div(4, 3, &BigNat::from(120u32)).unwrap(), BigNat::from(4u32));
        assert_eq!(nor_div(4, 3, &BigNat::zero()).unwrap(), BigNat::zero());
        assert!(nor_div(3, 3, &BigNat::one()).is_err());
    }

    #[test]
    fn combi_examples() {
        assert_eq!(combi_quotient(1, 2).unwrap(), ratio(2, 1));
        assert_eq!(combi_quotient(2, 2).unwrap(), ratio(28, 6));
        assert!(combi_lower_bound(1, 2) <= combi_quotient(1, 2).unwrap());
    }

    #[test]
    fn lognor_identity_prefix() {
        let spec = LognorSpec::identity();
        let vals: Vec<u64> = (0..5).map(|x| spec.lognor_u64(x).unwrap()).collect();
        assert_eq!(vals, vec![0, 1, 2, 2, 3]);
    }

    #[test]
    fn lognor_bounded_by_components() {
        let spec = LognorSpec::cap_div(4, 3).unwrap();
        for x in 0..400u64 {
            let v = spec.lognor_u64(x).unwrap();
            let bx = BigNat::from(x);
            assert!(v <= spec.nor(0, &bx) && v <= spec.nor(1, &bx));
        }
    }

    #[test]
    fn non_monotone_oracle_detected() {
        let bad: NormOracle = Arc::new(|x: &BigNat| if x == &BigNat::from(3u32) { 0 } else { x.to_u64().unwrap() });
        let id: NormOracle = Arc::new(|x: &BigNat| x.to_u64().unwrap());
        let spec = LognorSpec::new(bad, id);
        let r = (0..10u64).map(|x| spec.lognor_u64(x)).find(|r| r.is_err());
        assert!(r.is_some());
    }

    #[test]
    fn witness_on_small_family() {
        // five sets each covering half of an 8-point space
        let sets = [0b0000_1111u64, 0b0011_1100, 0b1111_0000, 0b0101_0101, 0b0011_0011];
        let w = intersection_witness(8, &sets, 2).unwrap();
        assert!(witness_holds(&w, sets.len(), 2));
    }
}
