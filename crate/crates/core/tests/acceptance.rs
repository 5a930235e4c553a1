//! End-to-end acceptance checks. Each criterion prints one line with its
//! verdict, the measured time and the pinned time limit.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use creature_core::atoms::{mu, split_j};
use creature_core::compound::{compound_norm, glue, half, restrict, union_creature, unhalve, CompoundCreature};
use creature_core::counting::{
    combi_quotient, intersection_witness, nor_cap, nor_div, nor_div_denominator, LognorSpec,
};
use creature_core::exactnum::{BigNat, NormValue, Rational, SizeDescriptor};
use creature_core::frame::gen::{
    algebra_frame, full_creature, random_condition, random_condition_on, random_creature, random_possibility,
    random_strengthening, unhalving_frame, unhalving_instance,
};
use creature_core::frame::toy::{uniform_frame, ToyConfig};
use creature_core::frame::{
    cascade, curlywedge, iota, iota_inverse, leq_check, poss_set, possibility_elements, prune_condition,
    slalom_decode, slalom_encode, wedge, ConditionPrefix, Frame, Index, IndexType, PossVariant, Sublevel,
};
use creature_core::interval::IndexInterval;
use creature_core::par;
use creature_core::sacks::{fat_nodes, homogenize_cube, FiniteTree};
use creature_core::subatoms::{check_bigness, BignessMode, NmFamily};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

/// Enclosure precision for recomputed norm comparisons.
const CHECK_PREC: u32 = 60;

fn approx_ge(a: &NormValue, b: &NormValue) -> bool {
    a.interval(CHECK_PREC).hi >= b.interval(CHECK_PREC).lo
}

fn ix(id: u32, ty: IndexType) -> Index {
    Index::new(id, ty)
}

// 1 ------------------------------------------------------------------------

fn bigness() -> Verdict {
    let mut total = 0u64;
    for len in 1..=2u32 {
        let fam = NmFamily::unchecked(IndexInterval::new(0, len), 2).map_err(|e| e.to_string())?;
        let n = 1u64 << len;
        let v = check_bigness(&fam, 2, BignessMode::Strong, None, u64::MAX, 0).map_err(|e| e.to_string())?;
        ensure(v.exhaustive, || format!("|I| = {len}: sampled instead of exhaustive"))?;
        ensure(v.passed(), || format!("|I| = {len}: counterexample {:?}", v.counterexamples[0]))?;
        ensure(v.subatoms_checked == (1 << n) - 1, || format!("|I| = {len}: {} subatoms", v.subatoms_checked))?;
        // every 2-coloring of x has a class of size >= |x|/2, i.e. log2-drop <= 1, norm drop <= 1/2
        let expected: u64 = (1..1u64 << n).map(|m| 1u64 << m.count_ones()).sum();
        ensure(v.colorings_checked == expected, || format!("|I| = {len}: {} colorings, expected {expected}", v.colorings_checked))?;
        for m in 1..1u64 << n {
            let size = m.count_ones();
            for col in 0..1u64 << size {
                let ones = col.count_ones();
                ensure(2 * ones.max(size - ones) >= size, || "pigeonhole oracle".into())?;
            }
        }
        total += v.colorings_checked;
    }
    Ok(format!("{total} (subatom, coloring) pairs, 0 counterexamples"))
}

// 2 ------------------------------------------------------------------------

/// Splitting size of a set of `d`-bit codes, bit `i` being the choice at level `i`.
fn splitting_size(set: &[u64], level: u32, d: u32) -> i64 {
    if set.is_empty() {
        return i64::MIN / 2;
    }
    if level == d {
        return 0;
    }
    let (a, b): (Vec<u64>, Vec<u64>) = set.iter().partition(|&&x| x >> level & 1 == 0);
    let (sa, sb) = (splitting_size(&a, level + 1, d), splitting_size(&b, level + 1, d));
    sa.max(sb).max(1 + sa.min(sb))
}

fn ramsey() -> Verdict {
    let mut lines = Vec::new();
    for (n, c) in [(1u64, 2u64), (1, 3), (2, 2)] {
        let d = (n * c) as u32;
        let points = 1u64 << d;
        let count = c.pow(points as u32);
        let bad = par::count_range(count, |code| {
            let mut colors = vec![0u64; points as usize];
            let mut k = code;
            for slot in colors.iter_mut() {
                *slot = k % c;
                k /= c;
            }
            let color = |p: &[u64]| colors[p[0] as usize];
            match homogenize_cube(1, n, c, &color) {
                Ok((sets, hue)) => {
                    let set = &sets[0];
                    !(set.iter().all(|&x| colors[x as usize] == hue) && splitting_size(set, 0, d) >= n as i64)
                }
                Err(_) => true,
            }
        });
        ensure(bad == 0, || format!("(1,{n},{c}): {bad} colorings without a homogeneous set"))?;
        lines.push(format!("(1,{n},{c}): {count}"));
    }
    Ok(format!("colorings checked {}", lines.join(", ")))
}

// 3 ------------------------------------------------------------------------

fn split_ok(ell: u64, sets: &[Vec<u64>]) -> Result<(), String> {
    let out = split_j(ell, sets).map_err(|e| format!("ell {ell}: {e}"))?;
    ensure(out.len() == sets.len(), || "output length".into())?;
    let cap = 3u64.pow(ell as u32 + 1);
    let mut seen = BTreeSet::new();
    for (a, b) in sets.iter().zip(&out) {
        let a: BTreeSet<u64> = a.iter().copied().collect();
        ensure(b.iter().all(|x| a.contains(x)), || "output not inside input".into())?;
        ensure(b.iter().all(|&x| seen.insert(x)), || format!("ell {ell}: outputs not disjoint"))?;
        // mu^ell drop <= 1  <=>  max(|A|,1) <= 3^(ell+1) max(|B|,1)
        ensure((a.len() as u64).max(1) <= cap * (b.len() as u64).max(1), || {
            format!("ell {ell}: |A| = {}, |B| = {}", a.len(), b.len())
        })?;
    }
    Ok(())
}

/// Calls `f` on every vector of `parts` naturals summing to `total`.
fn compositions(parts: usize, total: u64, prefix: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> Result<(), String>) -> Result<(), String> {
    if parts == 1 {
        prefix.push(total);
        let r = f(prefix);
        prefix.pop();
        return r;
    }
    for v in 0..=total {
        prefix.push(v);
        compositions(parts - 1, total - v, prefix, f)?;
        prefix.pop();
    }
    Ok(())
}

/// Realizes Venn-region sizes (regions indexed by nonzero membership masks) as sets.
fn realize(k: usize, regions: &[u64]) -> Vec<Vec<u64>> {
    let mut sets = vec![Vec::new(); k];
    let mut next = 0u64;
    for (r, &size) in regions.iter().enumerate() {
        let mask = r + 1;
        for _ in 0..size {
            for (i, s) in sets.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    s.push(next);
                }
            }
            next += 1;
        }
    }
    sets
}

fn split_j_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let ell = rng.gen_range(0..=5u64);
        let j = rng.gen_range(1..=729u64);
        let k = rng.gen_range(1..=ell as usize + 1);
        let sets: Vec<Vec<u64>> = (0..k)
            .map(|_| {
                let p: f64 = rng.gen_range(0.05..1.0);
                (0..j).filter(|_| rng.gen_bool(p)).collect()
            })
            .collect();
        split_ok(ell, &sets)?;
    }
    let mut exhaustive = 0u64;
    // one or two sets: the outcome is determined by the Venn-region sizes; the rest of J is unused
    for ell in 0..=2u64 {
        let k = ell as usize + 1;
        let regions = (1usize << k) - 1;
        let firsts: Vec<Result<u64, String>> = par::map_range(28, |first| {
            let mut n = 0u64;
            let mut f = |rest: &[u64]| {
                let mut r = vec![first];
                r.extend_from_slice(&rest[..regions - 1]);
                n += 1;
                split_ok(ell, &realize(k, &r))
            };
            compositions(regions, 27 - first, &mut Vec::new(), &mut f).map(|_| n)
        });
        for r in firsts {
            exhaustive += r?;
        }
    }
    // every pair of subsets of small ground sets, literally
    for j in 0..=7u32 {
        for code in 0..1u64 << (2 * j) {
            let a: Vec<u64> = (0..j as u64).filter(|&i| code >> i & 1 == 1).collect();
            let b: Vec<u64> = (0..j as u64).filter(|&i| code >> (j as u64 + i) & 1 == 1).collect();
            split_ok(1, &[a, b])?;
            exhaustive += 1;
        }
    }
    Ok(format!("1000 random instances, {exhaustive} exhaustive instances with |J| <= 27"))
}

// 4 ------------------------------------------------------------------------

fn norm(frame: &Frame, c: &CompoundCreature) -> NormValue {
    compound_norm(frame, c).expect("norm").total
}

fn least(frame: &Frame, cs: &[CompoundCreature]) -> NormValue {
    cs.iter().map(|c| norm(frame, c)).reduce(|a, b| if approx_ge(&a, &b) { b } else { a }).expect("nonempty")
}

fn norm_identities() -> Verdict {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut halved = 0;
    for _ in 0..500 {
        let p = random_condition(&frame, &mut rng).map_err(|e| e.to_string())?;
        let g = glue(&frame, p.creatures()).map_err(|e| e.to_string())?;
        ensure(approx_ge(&norm(&frame, &g), &least(&frame, p.creatures())), || format!("glue below min:\n{p}"))?;
        for c in p.creatures() {
            let hc = half(&frame, c).map_err(|e| e.to_string())?;
            let mp = &frame.level(c.m_dn()).map_err(|e| e.to_string())?.maxposs_below;
            let slack = Rational::new(1.into(), BigInt::from(mp.clone()));
            ensure(approx_ge(&norm(&frame, &hc), &norm(&frame, c).sub_rational(slack)), || "half drop too large".into())?;
            halved += 1;
        }
    }
    // exact drop: liminf is the unique minimum and N - d = 3 >= 2
    let hframe = uniform_frame(&ToyConfig {
        height: 9,
        sacks_len: 4,
        j_count: 54,
        mu_param: 0,
        maxposs: Some(1),
        nm_len: 6,
        ls_poss: 8,
        ..ToyConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let base: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let tol = rat(1, 1 << 40);
    for lvl in 6..9 {
        let c = full_creature(&hframe, &mut rng, lvl, lvl + 1, &base).map_err(|e| e.to_string())?;
        let n = compound_norm(&hframe, &c).map_err(|e| e.to_string())?;
        let li = n.liminf.values().next().expect("liminf").clone();
        let unique = n.components().iter().filter(|v| !v.gt(&li).unwrap_or(false)).count() == 1;
        ensure(unique, || "liminf is not the unique minimum".into())?;
        let after = norm(&hframe, &half(&hframe, &c).map_err(|e| e.to_string())?);
        let diff = after.sub_rational(Rational::zero()).interval(CHECK_PREC);
        let want = n.total.sub_rational(Rational::one()).interval(CHECK_PREC);
        ensure((&diff.lo - &want.hi) >= -tol.clone() && (&diff.hi - &want.lo) <= tol, || format!("half not exact: {after}"))?;
    }
    // union and restriction
    let uframe = uniform_frame(&ToyConfig { height: 7, j_count: 54, mu_param: 3, nm_len: 6, maxposs: Some(1), ..ToyConfig::default() })
        .map_err(|e| e.to_string())?;
    let other: BTreeSet<Index> = [ix(1, IndexType::Sk), ix(1, IndexType::Nm), ix(0, IndexType::Cn)].into();
    for _ in 0..10 {
        let c1 = full_creature(&uframe, &mut rng, 4, 6, &base).map_err(|e| e.to_string())?;
        let c2 = full_creature(&uframe, &mut rng, 4, 6, &other).map_err(|e| e.to_string())?;
        let u = union_creature(&uframe, &c1, &c2).map_err(|e| e.to_string())?;
        let x = least(&uframe, &[c1.clone(), c2.clone()]);
        let bound = x.scale(rat(1, 2)).sub_rational(Rational::one());
        ensure(approx_ge(&norm(&uframe, &u), &bound), || "union below x/2 - 1".into())?;
        let back = restrict(&uframe, &u, &base).map_err(|e| e.to_string())?;
        ensure(approx_ge(&norm(&uframe, &back), &norm(&uframe, &u)), || "restriction lowered the norm".into())?;
    }
    let wide: BTreeSet<Index> =
        [ix(0, IndexType::Sk), ix(1, IndexType::Sk), ix(0, IndexType::Nm), ix(1, IndexType::Nm), ix(0, IndexType::Nn), ix(0, IndexType::Cn)].into();
    for _ in 0..100 {
        let c = random_creature(&frame, &mut rng, 3, 5, &wide).map_err(|e| e.to_string())?;
        let r = restrict(&frame, &c, &base).map_err(|e| e.to_string())?;
        ensure(approx_ge(&norm(&frame, &r), &norm(&frame, &c)), || "restriction lowered the norm".into())?;
    }
    Ok(format!("500 glued stacks, {halved} halvings, 3 exact halvings, 10 unions, 110 restrictions"))
}

// 5 ------------------------------------------------------------------------

fn unhalving() -> Verdict {
    let frame = unhalving_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..50 {
        let (q, h, r, m) = unhalving_instance(&frame, &mut rng).map_err(|e| e.to_string())?;
        let (s, rep) = unhalve(&frame, &q, h, &r, &m).map_err(|e| format!("instance {t}: {e}"))?;
        ensure(rep.clauses.len() == 7, || "expected seven clauses".into())?;
        ensure(rep.holds(), || format!("instance {t}: {:?}", rep.clauses.iter().find(|c| !c.holds)))?;
        // recompute nor(s, h) >= M - 1/maxposs(<h)
        let mp = &frame.level(h).map_err(|e| e.to_string())?.maxposs_below;
        let floor = NormValue::rational(m.clone() - Rational::new(1.into(), BigInt::from(mp.clone())));
        ensure(approx_ge(&norm(&frame, &s.creatures()[0]), &floor), || format!("instance {t}: nor(s,h) too small"))?;
        ensure(s.w()[0] == h, || "min w(s) != h".into())?;
    }
    Ok("50 instances, all seven clauses hold".into())
}

// 6 ------------------------------------------------------------------------

fn f_cap(b: u64, n: u64) -> u64 {
    (0..n).fold(1, |f, _| 2 * b * f + 1)
}

fn nor_cap_oracle(b: u64, m: u64) -> u64 {
    (0..).take_while(|&n| f_cap(b, n) <= m).last().unwrap_or(0)
}

fn binom(n: u64, k: u64) -> BigNat {
    (0..k).fold(BigNat::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn counting_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let omega = rng.gen_range(2..=16u32);
        let b = rng.gen_range(2..=3u64);
        let k = rng.gen_range(1..=40usize);
        let need = (omega as u64).div_ceil(b) as u32;
        let sets: Vec<u64> = (0..k)
            .map(|_| loop {
                let s = rng.gen::<u64>() & ((1u64 << omega) - 1);
                if s.count_ones() >= need {
                    break s;
                }
            })
            .collect();
        let w = intersection_witness(omega, &sets, b).map_err(|e| e.to_string())?;
        let inter = w.subfamily.iter().fold((1u64 << omega) - 1, |a, &i| a & sets[i]);
        let measure = rat(inter.count_ones() as i64, omega as i64);
        let m = 2 * k as u64 * b + 1;
        let eps = rat(1, b as i64) / (Rational::from_integer(2.into()) * Rational::from_integer(BigInt::one() << m));
        ensure(w.subfamily.iter().collect::<BTreeSet<_>>().len() == w.subfamily.len(), || "repeated sets".into())?;
        ensure(nor_cap_oracle(b, w.subfamily.len() as u64) + 1 >= nor_cap_oracle(b, k as u64), || "nor_cap drop".into())?;
        ensure(measure >= eps && w.eps == eps, || format!("intersection {measure} below {eps}"))?;
        ensure(nor_cap(b, &BigNat::from(k)).ok() == Some(nor_cap_oracle(b, k as u64)), || "nor_cap mismatch".into())?;
    }
    // POSS: complements of 2-subsets of 16 points
    ensure(nor_div_denominator(4, 3).ok() == Some(BigNat::from(28u32)), || "denominator".into())?;
    let poss: Vec<u16> = (0..16).flat_map(|a| (a + 1..16).map(move |b| !((1u16 << a) | (1u16 << b)))).collect();
    let mut ts = 0;
    for t in 0..=u16::MAX {
        if t.count_ones() != 8 {
            continue;
        }
        ts += 1;
        let covers: Vec<bool> = poss.iter().map(|&x| x & t == t).collect();
        let cover_count = covers.iter().filter(|&&c| c).count();
        ensure(cover_count == 28, || format!("T = {t:#06x} covered {cover_count} times"))?;
        for _ in 0..4 {
            let c: Vec<bool> = (0..poss.len()).map(|_| rng.gen_bool(0.6)).collect();
            let size_c = c.iter().filter(|&&x| x).count() as u64;
            let size_d = c.iter().zip(&covers).filter(|(&x, &cv)| x && !cv).count() as u64;
            let nc = nor_div(4, 3, &BigNat::from(size_c)).map_err(|e| e.to_string())?;
            let nd = nor_div(4, 3, &BigNat::from(size_d)).map_err(|e| e.to_string())?;
            ensure(nc == BigNat::from(size_c / 28) && nd == BigNat::from(size_d / 28), || "nor_div mismatch".into())?;
            ensure(nd + 1u32 >= nc, || "nor_div dropped by more than 1".into())?;
        }
    }
    ensure(ts == 12870, || format!("{ts} half-sized sets"))?;
    let spec = LognorSpec::identity();
    let table: Vec<u64> = (0..=2048u64).map(|x| spec.lognor_u64(x)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(table[..5] == [0, 1, 2, 2, 3], || format!("lognor(0..4) = {:?}", &table[..5]))?;
    ensure(table.windows(2).all(|w| w[0] <= w[1]), || "lognor not monotone".into())?;
    for x in 0..=2048usize {
        for a in 0..=x {
            ensure(table[a].max(table[x - a]) + 1 >= table[x], || format!("2-bigness fails at {x} = {a} + {}", x - a))?;
        }
    }
    for n in 1..=64u64 {
        for k in 2..=8u64 {
            let q = combi_quotient(n, k).map_err(|e| e.to_string())?;
            let want = Rational::new(binom(2 * n * k, n).into(), binom(n * k, n).into());
            ensure(q == want, || format!("combi({n},{k}) mismatch"))?;
            let lower = num_traits::Pow::pow(rat(2 * k as i64 - 1, k as i64), n as u32);
            ensure(q >= lower, || format!("combi({n},{k}) below (2-1/k)^N"))?;
        }
    }
    Ok("500 witness families, 12870 half-sized T, lognor bigness to 2048, combi N<=64 k<=8".into())
}

// 7 ------------------------------------------------------------------------

fn cascade_suite() -> Verdict {
    let t = cascade(Sublevel::sacks(1)).map_err(|e| e.to_string())?;
    let one = BigNat::one();
    let r0 = t.row(Sublevel::sacks(0)).ok_or("row (0,-1) missing")?;
    ensure(r0.maxposs_below.exact() == Some(&one), || "maxposs(<0) != 1".into())?;
    ensure(r0.big_b.exact() == Some(&BigNat::from(2u32)), || "B(0,-1) != 2".into())?;
    ensure(r0.j_count.as_ref().and_then(|j| j.exact()) == Some(&BigNat::from(3u32)), || "J0 != 3".into())?;
    ensure(t.adjustments.iter().any(|a| a.contains("from 3 to 4")), || format!("adjustments {:?}", t.adjustments))?;
    ensure(r0.h_below.exact() == Some(&BigNat::from(4u32)), || "H(<(0,-1)) after adjustment".into())?;
    let r00 = t.row(Sublevel::subatomic(0, 0)).ok_or("row (0,0) missing")?;
    ensure(r00.small_b.as_ref().and_then(|b| b.exact()) == r00.big_b.exact(), || "b((0,0)) != B((0,0))".into())?;
    // mu^0(J0) = 2^(0 * maxposs) = 1
    ensure(mu(0, 3).exact() == Some(Rational::one()), || "mu^0(J0) != 1".into())?;
    ensure(t.all_checks_hold(), || format!("{:?}", t.checks.iter().find(|c| !c.1)))?;
    let mut towers = 0;
    for row in &t.rows {
        for v in [&row.h_below, &row.maxposs_below, &row.big_b].into_iter().chain(row.small_b.as_ref()) {
            if v.exact().is_none() {
                towers += 1;
                ensure(matches!(v.bits_lower(), SizeDescriptor::Exact(_)) || v.bits_lower().is_tower(), || "bit bound".into())?;
            }
        }
    }
    let r01 = t.row(Sublevel::subatomic(0, 1)).ok_or("row (0,1) missing")?;
    ensure(r01.maxposs_below.bits_lower() == SizeDescriptor::exact(5122u32), || "maxposs(<(0,1)) bit bound".into())?;
    Ok(format!("{} rows, {} checks, {towers} lower-bound entries", t.rows.len(), t.checks.len()))
}

// 8 ------------------------------------------------------------------------

fn strengthen(frame: &Frame, p: &ConditionPrefix, rng: &mut ChaCha8Rng) -> ConditionPrefix {
    for _ in 0..20 {
        if let Ok(q) = random_strengthening(frame, p, rng) {
            return q;
        }
    }
    p.clone()
}

fn check_iota(frame: &Frame, p: &ConditionPrefix, u: Sublevel) -> Result<bool, String> {
    let a = poss_set(frame, p, u, PossVariant::PerIndex).map_err(|e| e.to_string())?;
    let b = poss_set(frame, p, u, PossVariant::PerSublevel).map_err(|e| e.to_string())?;
    ensure(a.cardinality() == b.cardinality(), || format!("iota changes cardinality below {u:?}"))?;
    if let Ok(elems) = possibility_elements(&a, 1 << 12) {
        let images: BTreeSet<Vec<u64>> = elems.iter().map(|e| iota(&a, &b, e).expect("iota")).collect();
        ensure(images.len() == elems.len() && images.iter().all(|i| b.contains(i)), || "iota not injective".into())?;
        for (e, i) in elems.iter().zip(elems.iter().map(|e| iota(&a, &b, e).expect("iota"))) {
            ensure(&iota_inverse(&a, &b, &i).map_err(|e| e.to_string())? == e, || "iota inverse".into())?;
        }
        return Ok(true);
    }
    Ok(false)
}

fn sublevels_upto(frame: &Frame, lo: u64, height: u64) -> Vec<Sublevel> {
    let mut v = Vec::new();
    for l in lo..height {
        v.push(Sublevel::sacks(l));
        v.extend(frame.subatomic_sublevels(l, l + 1).expect("levels"));
    }
    v.push(Sublevel::sacks(height));
    v
}

fn condition_algebra() -> Verdict {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut chains, mut wedges, mut iotas, mut enumerated) = (0, 0, 0, 0);
    for _ in 0..200 {
        let p = random_condition(&frame, &mut rng).map_err(|e| e.to_string())?;
        let q = strengthen(&frame, &p, &mut rng);
        let r = strengthen(&frame, &q, &mut rng);
        let leq = |a: &ConditionPrefix, b: &ConditionPrefix| leq_check(&frame, a, b).map(|x| x.holds()).map_err(|e| e.to_string());
        ensure(leq(&p, &p)? && leq(&q, &q)? && leq(&r, &r)?, || "leq not reflexive".into())?;
        let (qp, rq) = (leq(&q, &p)?, leq(&r, &q)?);
        if qp && rq {
            chains += 1;
            ensure(leq(&r, &p)?, || format!("transitivity fails:\n{p}\n{q}\n{r}"))?;
        }
        // an unrelated third condition of the same height
        let s = random_condition(&frame, &mut rng).map_err(|e| e.to_string())?;
        if s.height() == p.height() && leq(&s, &r)? && leq(&r, &p)? {
            ensure(leq(&s, &p)?, || "transitivity fails on unrelated triple".into())?;
        }
        let height = p.height().expect("nonempty");
        for &ell in &p.w()[..p.w().len() - 1] {
            let set = poss_set(&frame, &p, Sublevel::sacks(ell), PossVariant::PerIndex).map_err(|e| e.to_string())?;
            let eta = random_possibility(&set, &mut rng);
            let out = wedge(&frame, &p, ell, &eta).map_err(|e| e.to_string())?;
            ensure(leq(&out, &p)?, || "wedge not below its source".into())?;
            wedges += 1;
        }
        let subs = frame.subatomic_sublevels(p.w()[0], height).map_err(|e| e.to_string())?;
        let u = subs[rng.gen_range(0..subs.len())];
        let set = poss_set(&frame, &p, u, PossVariant::PerIndex).map_err(|e| e.to_string())?;
        let out = curlywedge(&frame, &p, u, &random_possibility(&set, &mut rng)).map_err(|e| e.to_string())?;
        ensure(leq(&out, &p)?, || "curlywedge not below its source".into())?;
        wedges += 1;
        for u in sublevels_upto(&frame, p.w()[0], height) {
            iotas += 1;
            enumerated += check_iota(&frame, &p, u)? as u64;
        }
    }
    ensure(chains >= 150, || format!("only {chains} strengthening chains"))?;
    // pruned bound: supports below maxwidth, Sacks columns pruned
    let (mut pruned, mut bounded) = (0, 0);
    let base: BTreeSet<Index> = [ix(0, IndexType::Sk), ix(0, IndexType::Nm), ix(0, IndexType::Nn)].into();
    let mut grown = base.clone();
    grown.insert(ix(1, IndexType::Sk));
    for t in 0..60 {
        let (w, supports) = if t % 2 == 0 { (vec![4, 5, 6], vec![base.clone(), grown.clone()]) } else { (vec![4, 6], vec![base.clone()]) };
        let p = random_condition_on(&frame, &mut rng, &w, &supports, None).map_err(|e| e.to_string())?;
        let p = prune_condition(&frame, &p).map_err(|e| e.to_string())?;
        for c in p.creatures() {
            let lv = frame.level(c.m_dn()).map_err(|e| e.to_string())?;
            ensure((c.supp().len() as u64) < c.m_dn(), || "support too wide".into())?;
            ensure(c.columns().values().all(|s| s.len() as u64 <= 1u64 << lv.sacks.len), || "column not pruned".into())?;
        }
        for u in sublevels_upto(&frame, 4, 6) {
            // the top of the frame has no maxposs entry
            if let Ok(bound) = frame.maxposs_before(u) {
                for variant in [PossVariant::PerIndex, PossVariant::PerSublevel] {
                    let card = poss_set(&frame, &p, u, variant).map_err(|e| e.to_string())?.cardinality();
                    ensure(card <= bound, || format!("|poss(p,<{u:?})| = {card} > maxposs = {bound}"))?;
                }
                bounded += 1;
            }
            iotas += 1;
            enumerated += check_iota(&frame, &p, u)? as u64;
        }
        pruned += 1;
    }
    Ok(format!("200 triples ({chains} chains), {wedges} wedges, {pruned} pruned prefixes ({bounded} bounds), {iotas} iota checks ({enumerated} elementwise)"))
}

// 9 ------------------------------------------------------------------------

fn slalom() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=24usize);
        let g: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=30)).collect();
        let f: Vec<u64> = g.iter().map(|&b| rng.gen_range(0..=b)).collect();
        let r = slalom_encode(&f, &g).map_err(|e| e.to_string())?;
        // G(k) = k + 1 + sum_{i<=k} g(i); block k is [G(k-1), G(k))
        let mut start = 0usize;
        for (k, &gk) in g.iter().enumerate() {
            let end = k + 1 + g[..=k].iter().sum::<u64>() as usize;
            ensure(end - start == gk as usize + 1, || "block length".into())?;
            ensure(r[start..end].iter().filter(|&&b| b).count() == 1, || format!("block {k} not unique"))?;
            start = end;
        }
        ensure(start == r.len(), || "code length".into())?;
        ensure(slalom_decode(&r, &g).map_err(|e| e.to_string())? == f, || "round trip".into())?;
    }
    Ok("10000 sequences".into())
}

// 10 -----------------------------------------------------------------------

struct FatStats {
    trees: u64,
    hypothesis: u64,
}

/// Checks one tree at level `m`: the library's fat nodes against a direct count,
/// and both count bounds whenever the measure hypothesis holds.
fn fat_check(tree: &FiniteTree, d: u32, m: u32, stats: &mut FatStats) -> Result<(), String> {
    let eps = rat(1, 4);
    let rep = fat_nodes(tree, m, &eps).map_err(|e| e.to_string())?;
    let cone = 1u64 << (d - m);
    let mut counts = vec![0u64; 1 << m];
    for &leaf in tree.leaves() {
        counts[(leaf & ((1 << m) - 1)) as usize] += 1;
    }
    let size = counts.iter().filter(|&&c| c > 0).count() as u64;
    let fat = counts.iter().filter(|&&c| 4 * c >= 3 * cone).count() as u64;
    let mu = rat(tree.leaves().len() as i64, 1 << d);
    let hyp = rat(size as i64, 1 << m) - &mu * &eps * &eps <= mu;
    ensure(rep.fat.len() as u64 == fat && rep.level_size == size && rep.hypothesis == hyp, || "fat node report".into())?;
    stats.trees += 1;
    if hyp {
        stats.hypothesis += 1;
        let l = Rational::from_integer(fat.into());
        let one_minus = Rational::one() - &eps;
        ensure(l >= Rational::from_integer((1u64 << m).into()) * &mu * &one_minus, || format!("measure bound fails at d={d} m={m}"))?;
        ensure(l >= Rational::from_integer(size.into()) * one_minus, || format!("level bound fails at d={d} m={m}"))?;
    }
    Ok(())
}

/// Calls `f` on every nondecreasing sequence of `len` values in `0..=max`.
fn multisets(len: usize, max: u64, lo: u64, prefix: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> Result<(), String>) -> Result<(), String> {
    if prefix.len() == len {
        return f(prefix);
    }
    for v in lo..=max {
        prefix.push(v);
        multisets(len, max, v, prefix, f)?;
        prefix.pop();
    }
    Ok(())
}

fn fat_nodes_suite() -> Verdict {
    let mut stats = FatStats { trees: 0, hypothesis: 0 };
    // literal: every leaf set up to depth 4
    for d in 1..=4u32 {
        for mask in 1..1u64 << (1 << d) {
            if 2 * mask.count_ones() < 1 << d {
                continue;
            }
            let tree = FiniteTree::new(d, (0..1u64 << d).filter(|&x| mask >> x & 1 == 1)).map_err(|e| e.to_string())?;
            for m in 0..=d {
                fat_check(&tree, d, m, &mut stats)?;
            }
        }
    }
    // depth 5 and 6: fat counts, level size and density depend only on the
    // multiset of cone sizes at level m, so every profile is one tree class
    for d in 5..=6u32 {
        for m in 0..=d {
            let cone = 1u64 << (d - m);
            multisets(1 << m, cone, 0, &mut Vec::new(), &mut |prof| {
                let total: u64 = prof.iter().sum();
                if 2 * total < 1 << d {
                    return Ok(());
                }
                let leaves = prof.iter().enumerate().flat_map(|(s, &c)| (0..c).map(move |t| s as u64 | t << m));
                let tree = FiniteTree::new(d, leaves).map_err(|e| e.to_string())?;
                fat_check(&tree, d, m, &mut stats)
            })?;
        }
    }
    let exhaustive = stats.trees;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for d in 7..=8u32 {
        let mut sampled = 0;
        while sampled < 5000 {
            let p: f64 = rng.gen_range(0.5..1.0);
            let leaves: Vec<u64> = (0..1u64 << d).filter(|_| rng.gen_bool(p)).collect();
            if 2 * leaves.len() < 1 << d {
                continue;
            }
            let tree = FiniteTree::new(d, leaves).map_err(|e| e.to_string())?;
            for m in 0..=d {
                fat_check(&tree, d, m, &mut stats)?;
            }
            sampled += 1;
        }
    }
    Ok(format!(
        "{exhaustive} exhaustive (tree, level) cases to depth 6, {} sampled at 7-8, {} meeting the hypothesis",
        stats.trees - exhaustive,
        stats.hypothesis
    ))
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Verdict)> = vec![
        ("nm strong bigness, |I| <= 2, b = 2, exhaustive", 10, bigness),
        ("Ramsey base case (1,1,2), (1,1,3), (1,2,2), exhaustive", 60, ramsey),
        ("disjointification: 1000 random + exhaustive |J| <= 27", 30, split_j_suite),
        ("norm arithmetic: glue, union, half, restriction", 60, norm_identities),
        ("unhalving on 50 toy instances", 60, unhalving),
        ("counting suite", 120, counting_suite),
        ("cascade level-0 values and checks", 10, cascade_suite),
        ("condition algebra", 60, condition_algebra),
        ("slalom coding round trip", 5, slalom),
        ("fat nodes to depth 8", 60, fat_nodes_suite),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let (tag, detail) = match (&out, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the time limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] criterion {:>2}: {name}: {detail} ({:.2} s, limit {limit} s)", k + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
