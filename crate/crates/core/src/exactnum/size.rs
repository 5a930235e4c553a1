use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use super::BigNat;

/// Default exact bit budget for [`SizeDescriptor`] values.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

/// A natural number that is either stored exactly or as `multiplier * base^exponent`.
///
/// The tower form is only produced when the exact value would exceed the bit
/// budget, so every tower is larger than any exact value within budget.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SizeDescriptor {
    Exact(BigNat),
    PowerTower { base: BigNat, exponent: Box<SizeDescriptor>, multiplier: BigNat },
}

impl SizeDescriptor {
    pub fn exact<N: Into<BigNat>>(n: N) -> Self {
        SizeDescriptor::Exact(n.into())
    }

    pub fn as_exact(&self) -> Option<&BigNat> {
        match self {
            SizeDescriptor::Exact(n) => Some(n),
            _ => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_exact().and_then(|n| n.to_u64())
    }

    pub fn is_tower(&self) -> bool {
        matches!(self, SizeDescriptor::PowerTower { .. })
    }

    /// `multiplier * base^exponent`, exact when it fits in `budget` bits.
    pub fn power(base: &BigNat, exponent: &SizeDescriptor, multiplier: &BigNat, budget: u64) -> Self {
        if multiplier.is_zero() {
            return SizeDescriptor::Exact(BigNat::zero());
        }
        if base.is_one() {
            return SizeDescriptor::Exact(multiplier.clone());
        }
        if base.is_zero() {
            let zero_exp = exponent.as_exact().map(|e| e.is_zero()).unwrap_or(false);
            return SizeDescriptor::Exact(if zero_exp { multiplier.clone() } else { BigNat::zero() });
        }
        if let Some(e) = exponent.as_exact() {
            if let Some(e64) = e.to_u64() {
                let est = e64.saturating_mul(base.bits()).saturating_add(multiplier.bits());
                if est <= budget {
                    let p = if base == &BigNat::from(2u32) {
                        BigNat::one() << e64
                    } else {
                        base.pow(e64 as u32)
                    };
                    return SizeDescriptor::Exact(p * multiplier);
                }
            }
        }
        SizeDescriptor::PowerTower {
            base: base.clone(),
            exponent: Box::new(exponent.clone()),
            multiplier: multiplier.clone(),
        }
    }

    /// `2^exponent`.
    pub fn pow2(exponent: &SizeDescriptor, budget: u64) -> Self {
        Self::power(&BigNat::from(2u32), exponent, &BigNat::one(), budget)
    }

    /// Multiplication by an exact natural.
    pub fn mul_nat(&self, k: &BigNat) -> Self {
        match self {
            SizeDescriptor::Exact(n) => SizeDescriptor::Exact(n * k),
            SizeDescriptor::PowerTower { base, exponent, multiplier } => {
                if k.is_zero() {
                    return SizeDescriptor::Exact(BigNat::zero());
                }
                SizeDescriptor::PowerTower {
                    base: base.clone(),
                    exponent: exponent.clone(),
                    multiplier: multiplier * k,
                }
            }
        }
    }

    /// Bounds on the bit length. Tower bounds are themselves descriptors.
    pub fn bit_length_bounds(&self) -> (SizeDescriptor, SizeDescriptor) {
        match self {
            SizeDescriptor::Exact(n) => {
                let b = SizeDescriptor::exact(n.bits());
                (b.clone(), b)
            }
            SizeDescriptor::PowerTower { base, exponent, multiplier } => {
                // m * b^e has between e*(bits(b)-1) + bits(m) and e*bits(b) + bits(m) bits
                let bb = base.bits();
                let mb = multiplier.bits();
                match exponent.as_ref() {
                    SizeDescriptor::Exact(e) => (
                        SizeDescriptor::Exact(e * (bb - 1) + mb),
                        SizeDescriptor::Exact(e * bb + mb),
                    ),
                    tower => (
                        tower.mul_nat(&BigNat::from(bb - 1)),
                        // e is beyond budget, so e >= bits(m) and e*bb + bits(m) <= e*(bb+1)
                        tower.mul_nat(&BigNat::from(bb + 1)),
                    ),
                }
            }
        }
    }

    /// Exact lower bound on the bit length when it is itself exact.
    pub fn bit_length_lower(&self) -> SizeDescriptor {
        self.bit_length_bounds().0
    }

    /// Certified comparison. `None` only if bounds overlap and neither side is exact.
    pub fn compare(&self, other: &SizeDescriptor) -> Option<Ordering> {
        if self == other {
            return Some(Ordering::Equal);
        }
        if let (SizeDescriptor::Exact(a), SizeDescriptor::Exact(b)) = (self, other) {
            return Some(a.cmp(b));
        }
        let (alo, ahi) = self.bit_length_bounds();
        let (blo, bhi) = other.bit_length_bounds();
        if ahi.compare(&blo) == Some(Ordering::Less) {
            return Some(Ordering::Less);
        }
        if alo.compare(&bhi) == Some(Ordering::Greater) {
            return Some(Ordering::Greater);
        }
        // same base and exponent: compare multipliers
        if let (
            SizeDescriptor::PowerTower { base: b1, exponent: e1, multiplier: m1 },
            SizeDescriptor::PowerTower { base: b2, exponent: e2, multiplier: m2 },
        ) = (self, other)
        {
            if b1 == b2 && e1 == e2 {
                return Some(m1.cmp(m2));
            }
            if b1 == b2 && m1 == m2 {
                return e1.compare(e2);
            }
        }
        None
    }

    /// Compares against a machine integer.
    pub fn cmp_u64(&self, n: u64) -> Ordering {
        match self {
            SizeDescriptor::Exact(v) => v.cmp(&BigNat::from(n)),
            // towers exceed the bit budget, hence every u64
            SizeDescriptor::PowerTower { .. } => Ordering::Greater,
        }
    }

    pub fn le_u64(&self, n: u64) -> bool {
        self.cmp_u64(n) != Ordering::Greater
    }
}

impl From<u64> for SizeDescriptor {
    fn from(n: u64) -> Self {
        SizeDescriptor::exact(n)
    }
}

impl fmt::Display for SizeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeDescriptor::Exact(n) if n.bits() <= 128 => write!(f, "{n}"),
            SizeDescriptor::Exact(n) => write!(f, "<{} bits>", n.bits()),
            SizeDescriptor::PowerTower { base, exponent, multiplier } => {
                if !multiplier.is_one() {
                    if multiplier.bits() <= 128 {
                        write!(f, "{multiplier}*")?;
                    } else {
                        write!(f, "<{} bits>*", multiplier.bits())?;
                    }
                }
                write!(f, "{base}^({exponent})")
            }
        }
    }
}
