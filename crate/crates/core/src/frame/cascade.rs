//! The parameter cascade of the exact construction with `maxwidth(l) = l`.
//!
//! Only the first rows are exact: from `(0,1)` on the subatomic families are
//! astronomically large and the table carries certified lower bounds.

use std::fmt;

use num_traits::{One, ToPrimitive};

use super::{FrameError, Sublevel};
use crate::atoms::mu;
use crate::exactnum::{BigNat, NormValue, SizeDescriptor, DEFAULT_BIT_BUDGET};
use crate::sacks::maxwidth;
use crate::subatoms::nm_minimal_len;

/// A cascade entry: exact, or a certified lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CascadeValue {
    Exact(BigNat),
    AtLeast(SizeDescriptor),
}

impl CascadeValue {
    pub fn exact(&self) -> Option<&BigNat> {
        match self {
            CascadeValue::Exact(n) => Some(n),
            CascadeValue::AtLeast(_) => None,
        }
    }

    /// The value, or its lower bound, as a descriptor.
    pub fn lower(&self) -> SizeDescriptor {
        match self {
            CascadeValue::Exact(n) => SizeDescriptor::Exact(n.clone()),
            CascadeValue::AtLeast(d) => d.clone(),
        }
    }

    /// A lower bound on the bit length.
    pub fn bits_lower(&self) -> SizeDescriptor {
        match self {
            CascadeValue::Exact(n) => SizeDescriptor::exact(n.bits()),
            CascadeValue::AtLeast(d) => d.bit_length_lower(),
        }
    }

    fn at_least(d: SizeDescriptor) -> Self {
        CascadeValue::AtLeast(d)
    }
}

fn describe(d: &SizeDescriptor) -> String {
    match d {
        SizeDescriptor::Exact(n) if n.bits() <= 64 => n.to_string(),
        SizeDescriptor::Exact(n) => format!("<{} bits>", n.bits()),
        SizeDescriptor::PowerTower { base, exponent, multiplier } => {
            let m = if multiplier.is_one() { String::new() } else { format!("{multiplier}*") };
            format!("{m}{base}^({})", describe(exponent))
        }
    }
}

impl fmt::Display for CascadeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CascadeValue::Exact(n) => write!(f, "{}", describe(&SizeDescriptor::Exact(n.clone()))),
            CascadeValue::AtLeast(d) => write!(f, ">= {}", describe(d)),
        }
    }
}

/// Values attached to one sublevel `u`.
#[derive(Debug, Clone)]
pub struct CascadeRow {
    pub sublevel: Sublevel,
    /// `H(<u)`.
    pub h_below: CascadeValue,
    /// `maxposs(<u)`.
    pub maxposs_below: CascadeValue,
    /// `B(u)`.
    pub big_b: CascadeValue,
    /// `b(u)` on subatomic sublevels.
    pub small_b: Option<CascadeValue>,
    /// `|J_l|` and `|I_sk,l|` on Sacks sublevels.
    pub j_count: Option<CascadeValue>,
    pub sacks_len: Option<CascadeValue>,
}

#[derive(Debug, Clone)]
pub struct CascadeTable {
    pub rows: Vec<CascadeRow>,
    /// Deviations from the literal initial values.
    pub adjustments: Vec<String>,
    /// Why the table stops where it does, if before the requested sublevel.
    pub truncated: Option<String>,
    /// Named inequalities checked on the exactly computed rows.
    pub checks: Vec<(String, bool)>,
}

impl CascadeTable {
    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn row(&self, u: Sublevel) -> Option<&CascadeRow> {
        self.rows.iter().find(|r| r.sublevel == u)
    }

    /// Lines `sublevel name kind value` with `kind` either `exact` or `bits>=`.
    pub fn machine_rows(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            let mut push = |name: &str, v: &CascadeValue| {
                let (kind, val) = match v {
                    CascadeValue::Exact(n) => ("exact", n.to_string()),
                    CascadeValue::AtLeast(_) => ("bits>=", describe(&v.bits_lower())),
                };
                out.push(format!("{} {} {} {}", r.sublevel, name, kind, val));
            };
            push("H", &r.h_below);
            push("maxposs", &r.maxposs_below);
            push("B", &r.big_b);
            if let Some(b) = &r.small_b {
                push("b", b);
            }
            if let Some(j) = &r.j_count {
                push("J", j);
            }
            if let Some(i) = &r.sacks_len {
                push("I_sk", i);
            }
        }
        out
    }
}

impl fmt::Display for CascadeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>24} {:>24} {:>24} {:>24} {:>16} {:>6}", "u", "H(<u)", "maxposs(<u)", "B(u)", "b(u)", "J", "|I_sk|")?;
        let opt = |v: &Option<CascadeValue>| v.as_ref().map_or("-".to_string(), |v| v.to_string());
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>24} {:>24} {:>24} {:>24} {:>16} {:>6}",
                r.sublevel.to_string(),
                r.h_below.to_string(),
                r.maxposs_below.to_string(),
                r.big_b.to_string(),
                opt(&r.small_b),
                opt(&r.j_count),
                opt(&r.sacks_len)
            )?;
        }
        for a in &self.adjustments {
            writeln!(f, "adjusted: {a}")?;
        }
        if let Some(t) = &self.truncated {
            writeln!(f, "truncated: {t}")?;
        }
        for (name, ok) in &self.checks {
            writeln!(f, "{} {name}", if *ok { "ok  " } else { "FAIL" })?;
        }
        Ok(())
    }
}

fn nat(n: u64) -> BigNat {
    BigNat::from(n)
}

/// Computes the cascade up to and including `up_to`.
pub fn cascade(up_to: Sublevel) -> Result<CascadeTable, FrameError> {
    cascade_with_budget(up_to, DEFAULT_BIT_BUDGET)
}

/// As [`cascade`], keeping values exact only while they fit in `budget` bits.
/// The rows up to `(0,1)` need about 5200 bits.
pub fn cascade_with_budget(up_to: Sublevel, budget: u64) -> Result<CascadeTable, FrameError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut adjustments = Vec::new();
    let mut truncated = None;

    // (0,-1): literal initial values; H is raised so that H(<0) > maxposs(<0) + 0 + 2.
    let h0 = nat(3);
    let mp0 = nat(1);
    let h0_adj = if h0 <= &mp0 + 2u32 {
        let v = &mp0 + 3u32;
        adjustments.push(format!("H(<(0,-1)) raised from {h0} to {v} so that H(<0) > maxposs(<0) + 0 + 2"));
        v
    } else {
        h0.clone()
    };
    let i_sk0 = 1u64;
    let ell = 0u64;
    let j0 = 3u64.pow((maxwidth(ell + 1) << (ell * mp0.to_u64().expect("one"))) as u32);
    rows.push(CascadeRow {
        sublevel: Sublevel::sacks(0),
        h_below: CascadeValue::Exact(h0_adj.clone()),
        maxposs_below: CascadeValue::Exact(mp0.clone()),
        big_b: CascadeValue::Exact(nat(2)),
        small_b: None,
        j_count: Some(CascadeValue::Exact(nat(j0))),
        sacks_len: Some(CascadeValue::Exact(nat(i_sk0))),
    });
    checks.push(("H(<0) > maxposs(<0) + 0 + 2".into(), h0_adj > &mp0 + 2u32));
    checks.push(("J_0 = 3".into(), j0 == 3));
    checks.push((
        "mu^0(J_0) = 2^(0 * maxposs(<0))".into(),
        mu(maxwidth(0), j0).try_cmp(&NormValue::from_int(1))? == std::cmp::Ordering::Equal,
    ));
    if up_to <= Sublevel::sacks(0) {
        return Ok(CascadeTable { rows, adjustments, truncated, checks });
    }

    // (0,0): maxposs picks up the Sacks level, H the largest Sacks position.
    let mp00 = &mp0 << (i_sk0 * maxwidth(0)) as usize;
    let h00 = &h0_adj + 1u32 + (i_sk0 - 1);
    let big_b00 = BigNat::one() << (&h00 * &mp00).to_u64().expect("small") as usize;
    let b00 = big_b00.clone();
    rows.push(CascadeRow {
        sublevel: Sublevel::subatomic(0, 0),
        h_below: CascadeValue::Exact(h00.clone()),
        maxposs_below: CascadeValue::Exact(mp00.clone()),
        big_b: CascadeValue::Exact(big_b00.clone()),
        small_b: Some(CascadeValue::Exact(b00.clone())),
        j_count: None,
        sacks_len: None,
    });
    checks.push(("B nondecreasing from (0,-1) to (0,0)".into(), big_b00 >= nat(2)));
    checks.push(("maxposs nondecreasing from (0,-1) to (0,0)".into(), mp00 >= mp0));
    checks.push(("b((0,0)) = B((0,0))".into(), b00 == big_b00));
    checks.push(("b((0,0)) >= 2 maxposs(<(0,0))".into(), b00 >= &mp00 * 2u32));
    checks.push(("b((0,0)) >= 2^(1 * maxposs(<(0,0)))".into(), b00 >= BigNat::one() << mp00.to_u64().expect("small") as usize));
    if up_to <= Sublevel::subatomic(0, 0) {
        return Ok(CascadeTable { rows, adjustments, truncated, checks });
    }

    // (0,1): the nm family at b = 32 alone has |POSS| = 2^L with L exact,
    // which bounds M((0,0)) and H'(nm) from below.
    let b00_u = b00.to_u64().expect("small");
    let l = nat(nm_minimal_len(b00_u) as u64);
    let mp01 = SizeDescriptor::power(&BigNat::from(2u32), &SizeDescriptor::Exact(&l * maxwidth(1)), &mp00, budget);
    let hprime = BigNat::one() << l.to_u64().expect("small") as usize;
    let h01 = &h00 + 1u32 + &hprime;
    let Some(mp01_exact) = mp01.as_exact().cloned() else {
        let truncated = Some(format!("maxposs(<(0,1)) needs more than the {budget}-bit budget"));
        return Ok(CascadeTable { rows, adjustments, truncated, checks });
    };
    let big_b01 = SizeDescriptor::pow2(&SizeDescriptor::Exact(&h01 * &mp01_exact), budget);
    let b01 = big_b01.mul_nat(&(&b00 + 1u32));
    rows.push(CascadeRow {
        sublevel: Sublevel::subatomic(0, 1),
        h_below: CascadeValue::at_least(SizeDescriptor::Exact(h01)),
        maxposs_below: CascadeValue::at_least(mp01.clone()),
        big_b: CascadeValue::at_least(big_b01.clone()),
        small_b: Some(CascadeValue::at_least(b01.clone())),
        j_count: None,
        sacks_len: None,
    });
    if up_to <= Sublevel::subatomic(0, 1) {
        return Ok(CascadeTable { rows, adjustments, truncated, checks });
    }

    // Later rows: nm at b has |I| > b, so M(u) >= 2^b(u) and H'(nm) >= 2^b(u);
    // B(next) >= 2^H(<next) >= 2^(2^b(u)).
    let mut prev_b = b01;
    let mut prev_mp = mp01;
    for j in 2..j0 {
        let mp = SizeDescriptor::pow2(&prev_b, budget);
        let h = SizeDescriptor::pow2(&prev_b, budget);
        let big_b = SizeDescriptor::pow2(&h, budget);
        rows.push(CascadeRow {
            sublevel: Sublevel::subatomic(0, j as u32),
            h_below: CascadeValue::at_least(h),
            maxposs_below: CascadeValue::at_least(mp.clone()),
            big_b: CascadeValue::at_least(big_b.clone()),
            small_b: Some(CascadeValue::at_least(big_b.clone())),
            j_count: None,
            sacks_len: None,
        });
        checks.push((
            format!("maxposs nondecreasing into (0,{j}) (certified on lower bounds)"),
            mp.compare(&prev_mp) != Some(std::cmp::Ordering::Less),
        ));
        prev_b = big_b;
        prev_mp = mp;
        if up_to <= Sublevel::subatomic(0, j as u32) {
            return Ok(CascadeTable { rows, adjustments, truncated, checks });
        }
    }
    let mp1 = SizeDescriptor::pow2(&prev_b, budget);
    let h1 = SizeDescriptor::pow2(&prev_b, budget);
    let big_b1 = SizeDescriptor::pow2(&h1, budget);
    let j1 = SizeDescriptor::power(&nat(3), &SizeDescriptor::pow2(&mp1, budget).mul_nat(&nat(maxwidth(2))), &BigNat::one(), budget);
    rows.push(CascadeRow {
        sublevel: Sublevel::sacks(1),
        h_below: CascadeValue::at_least(h1),
        maxposs_below: CascadeValue::at_least(mp1),
        big_b: CascadeValue::at_least(big_b1),
        small_b: None,
        j_count: Some(CascadeValue::at_least(j1)),
        sacks_len: Some(CascadeValue::at_least(SizeDescriptor::exact(1u32))),
    });
    if up_to > Sublevel::sacks(1) {
        truncated = Some("J_1 is a tower; the sublevels of level 1 are not enumerated".into());
    }
    Ok(CascadeTable { rows, adjustments, truncated, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_values() {
        let t = cascade(Sublevel::sacks(1)).unwrap();
        let r = t.row(Sublevel::sacks(0)).unwrap();
        assert_eq!(r.maxposs_below.exact(), Some(&nat(1)));
        assert_eq!(r.big_b.exact(), Some(&nat(2)));
        assert_eq!(r.j_count.as_ref().unwrap().exact(), Some(&nat(3)));
        let r = t.row(Sublevel::subatomic(0, 0)).unwrap();
        assert_eq!(r.h_below.exact(), Some(&nat(5)));
        assert_eq!(r.big_b.exact(), Some(&nat(32)));
        assert_eq!(r.small_b.as_ref().unwrap().exact(), Some(&nat(32)));
        assert!(t.all_checks_hold(), "{t}");
        assert_eq!(t.adjustments.len(), 1);
        let r = t.row(Sublevel::subatomic(0, 1)).unwrap();
        assert_eq!(r.maxposs_below.bits_lower(), SizeDescriptor::exact(5122u32));
        assert!(t.truncated.is_none());
    }
}
