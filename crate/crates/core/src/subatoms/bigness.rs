use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Subatom, SubatomError, SubatomicFamily};
use crate::exactnum::{NormValue, Rational};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BignessMode {
    /// Norm drop at most 1.
    Plain,
    /// Norm drop at most `1/B`.
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub subatom: Subatom,
    /// Color of each possibility of `subatom`, in order.
    pub coloring: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BignessVerdict {
    pub exhaustive: bool,
    pub subatoms_checked: u64,
    pub colorings_checked: u64,
    pub counterexamples: Vec<Counterexample>,
    /// Seed used for sampled colorings, if any were sampled.
    pub seed: Option<u64>,
}

impl BignessVerdict {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// All nonempty subsets of `0..n` as subatoms (`n <= 20`).
pub fn all_subatoms(n: u64) -> Result<Vec<Subatom>, SubatomError> {
    if n > 20 {
        return Err(SubatomError::TooLarge(format!("2^{n} subatoms")));
    }
    (1u64..1 << n).map(Subatom::from_mask).collect()
}

fn decode_coloring(mut code: u64, len: usize, colors: u64) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let c = code % colors;
            code /= colors;
            c as u32
        })
        .collect()
}

/// Per-size verdicts `nor(k) >= target` for counting norms.
fn size_table(family: &dyn SubatomicFamily, x: &Subatom, target: &NormValue) -> Result<Vec<bool>, SubatomError> {
    let mut table = vec![false];
    for k in 1..=x.len() {
        let y = Subatom::new(x.poss()[..k].iter().copied())?;
        table.push(family.norm(&y)?.ge(target)?);
    }
    Ok(table)
}

fn homogeneous_ok(
    family: &dyn SubatomicFamily,
    x: &Subatom,
    coloring: &[u32],
    colors: u64,
    target: &NormValue,
    sizes: Option<&[bool]>,
) -> Result<bool, SubatomError> {
    if let Some(table) = sizes {
        let mut counts = vec![0usize; colors as usize];
        for &c in coloring {
            counts[c as usize] += 1;
        }
        let largest = counts.into_iter().max().unwrap_or(0);
        return Ok(table[largest]);
    }
    for c in 0..colors as u32 {
        let class: Vec<u64> = x.poss().iter().zip(coloring).filter(|(_, &k)| k == c).map(|(&a, _)| a).collect();
        if class.is_empty() {
            continue;
        }
        let y = Subatom::new(class.iter().copied())?;
        if family.norm(&y)?.ge(target)? {
            return Ok(true);
        }
        if !family.monotone() && class.len() <= 16 {
            for mask in 1u64..(1 << class.len()) - 1 {
                let z = Subatom::new((0..class.len()).filter(|i| mask >> i & 1 == 1).map(|i| class[i]))?;
                if family.norm(&z)?.ge(target)? {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Checks `B`-bigness: every coloring of `poss(x)` into `B` colors admits a
/// monochromatic `y <= x` with `nor(y) >= nor(x) - 1` (`- 1/B` in strong mode).
///
/// `members` defaults to every nonempty subset of POSS. Subatoms with more
/// than `budget` colorings get `budget` sampled colorings instead.
pub fn check_bigness(
    family: &dyn SubatomicFamily,
    colors: u64,
    mode: BignessMode,
    members: Option<&[Subatom]>,
    budget: u64,
    seed: u64,
) -> Result<BignessVerdict, SubatomError> {
    if colors == 0 {
        return Err(SubatomError::Precondition("need at least one color".into()));
    }
    let owned;
    let members = match members {
        Some(m) => m,
        None => {
            let n = family
                .poss_count_u64()
                .ok_or_else(|| SubatomError::TooLarge("POSS not enumerable".into()))?;
            owned = all_subatoms(n)?;
            &owned
        }
    };
    let drop = match mode {
        BignessMode::Plain => Rational::from_integer(1.into()),
        BignessMode::Strong => Rational::new(1.into(), (colors as i64).into()),
    };
    let mut verdict = BignessVerdict {
        exhaustive: true,
        subatoms_checked: 0,
        colorings_checked: 0,
        counterexamples: Vec::new(),
        seed: None,
    };
    for x in members {
        if !family.contains(x) {
            return Err(SubatomError::OutsideUniverse(*x.poss().last().expect("nonempty")));
        }
        let target = family.norm(x)?.sub_rational(drop.clone());
        let table = if family.counting() && family.monotone() { Some(size_table(family, x, &target)?) } else { None };
        let sizes = table.as_deref();
        let total = (colors as u128).checked_pow(x.len() as u32);
        let results: Vec<Result<Option<Vec<u32>>, SubatomError>> = match total {
            Some(t) if t <= budget as u128 => par::map_range(t as u64, |code| {
                let col = decode_coloring(code, x.len(), colors);
                Ok((!homogeneous_ok(family, x, &col, colors, &target, sizes)?).then_some(col))
            }),
            _ => {
                verdict.exhaustive = false;
                verdict.seed = Some(seed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ verdict.subatoms_checked);
                let samples: Vec<Vec<u32>> = (0..budget)
                    .map(|_| (0..x.len()).map(|_| rng.gen_range(0..colors) as u32).collect())
                    .collect();
                par::map_slice(&samples, |col| {
                    Ok((!homogeneous_ok(family, x, col, colors, &target, sizes)?).then(|| col.clone()))
                })
            }
        };
        verdict.subatoms_checked += 1;
        verdict.colorings_checked += results.len() as u64;
        for r in results {
            if let Some(coloring) = r? {
                verdict.counterexamples.push(Counterexample { subatom: x.clone(), coloring });
            }
        }
    }
    Ok(verdict)
}

/// Checks the structural axioms of a subatomic family on the given members:
/// membership, singleton norms below 1, singleton successors, and norm
/// monotonicity under inclusion when the family declares it.
pub fn check_family_axioms(family: &dyn SubatomicFamily, members: &[Subatom]) -> Result<Vec<String>, SubatomError> {
    let mut problems = Vec::new();
    let one = NormValue::from_int(1);
    for x in members {
        if !family.contains(x) {
            problems.push(format!("{x:?} not inside POSS"));
            continue;
        }
        if x.is_singleton() && family.norm(x)?.ge(&one)? {
            problems.push(format!("singleton {x:?} has norm >= 1"));
        }
        for &a in x.poss() {
            let s = Subatom::singleton(a);
            if !s.le(x) || !family.contains(&s) {
                problems.push(format!("no singleton successor of {x:?} at {a}"));
            }
        }
    }
    if family.monotone() {
        for x in members {
            for y in members {
                if y.le(x) && !family.norm(x)?.ge(&family.norm(y)?)? {
                    problems.push(format!("norm not monotone: {y:?} <= {x:?}"));
                }
            }
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IndexInterval;
    use crate::subatoms::{rescale_norm, CountingFamily, FamilyRef, NmFamily};
    use std::sync::Arc;

    #[test]
    fn nm_strong_bigness_small() {
        let f = NmFamily::unchecked(IndexInterval::new(0, 2), 2).unwrap();
        let v = check_bigness(&f, 2, BignessMode::Strong, None, 1 << 20, 0).unwrap();
        assert!(v.passed() && v.exhaustive);
        assert_eq!(v.subatoms_checked, 15);
    }

    #[test]
    fn identity_coloring_defeats_large_norm() {
        // nor = log2|x| on 4 points: nor(full) = 2, and 4 colors split it into singletons
        let f = CountingFamily::new(4, 2, Rational::from_integer(1.into())).unwrap();
        let full = Subatom::full(4);
        let v = check_bigness(&f, 4, BignessMode::Plain, Some(&[full]), 1 << 20, 0).unwrap();
        assert!(v.counterexamples.iter().any(|c| c.coloring == vec![0, 1, 2, 3]));
    }

    #[test]
    fn small_norm_is_big_for_any_b() {
        let f = CountingFamily::new(3, 3, Rational::from_integer(1.into())).unwrap();
        let v = check_bigness(&f, 5, BignessMode::Plain, None, 1 << 20, 0).unwrap();
        assert!(v.passed());
    }

    #[test]
    fn rescaled_counting_family_is_8_big() {
        let base: FamilyRef = Arc::new(CountingFamily::new(8, 2, Rational::from_integer(1.into())).unwrap());
        assert!(check_bigness(base.as_ref(), 2, BignessMode::Plain, None, 1 << 20, 0).unwrap().passed());
        let r = rescale_norm(base, 3);
        let members = vec![Subatom::full(8), Subatom::new(0..5).unwrap()];
        let v = check_bigness(&r, 8, BignessMode::Plain, Some(&members), 1 << 24, 0).unwrap();
        assert!(v.passed() && v.exhaustive);
    }

    #[test]
    fn sampled_mode_reports_seed() {
        let f = NmFamily::unchecked(IndexInterval::new(0, 3), 2).unwrap();
        let v = check_bigness(&f, 2, BignessMode::Strong, Some(&[Subatom::full(8)]), 10, 42).unwrap();
        assert!(!v.exhaustive);
        assert_eq!(v.seed, Some(42));
        assert!(v.passed());
    }

    #[test]
    fn axioms_hold_for_nm() {
        let f = NmFamily::unchecked(IndexInterval::new(0, 2), 2).unwrap();
        let members = all_subatoms(4).unwrap();
        assert!(check_family_axioms(&f, &members).unwrap().is_empty());
    }
}
