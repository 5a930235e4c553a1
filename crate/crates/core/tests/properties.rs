use std::cmp::Ordering;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use creature_core::atoms::{atom_norm, atom_norm_brute, mu, pairwise_disjoint, split_j};
use creature_core::counting::LognorSpec;
use creature_core::exactnum::{binomial_u64, ratio, Comparison, NormValue};
use creature_core::frame::gen::{algebra_frame, random_condition, random_strengthening};
use creature_core::frame::{leq_check, slalom_decode, slalom_encode};
use creature_core::sacks::{FiniteTree, Node, SacksColumn};
use creature_core::subatoms::{CnFamily, NmFamily, NnFamily, Subatom, SubatomicFamily};
use creature_core::IndexInterval;

fn mask_subatom(mask: u64) -> Subatom {
    Subatom::from_mask(mask).expect("nonempty mask")
}

#[test]
fn binomial_pascal_up_to_64() {
    for n in 1..=64u64 {
        for k in 1..n {
            let lhs = binomial_u64(n, k).unwrap();
            let rhs = binomial_u64(n - 1, k - 1).unwrap() + binomial_u64(n - 1, k).unwrap();
            assert_eq!(lhs, rhs, "C({n},{k})");
        }
        assert_eq!(binomial_u64(n, 0).unwrap(), BigUint::from(1u8));
        assert_eq!(binomial_u64(n, n).unwrap(), BigUint::from(1u8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn log_vs_rational_matches_integer_test(b in 2u64..7, m in 1u64..500, p in 0i64..20, q in 1i64..6) {
        let lhs = NormValue::log_quotient_u64(b, m, ratio(1, 1));
        let rhs = NormValue::frac(p, q);
        let expected = BigUint::from(m).pow(q as u32).cmp(&BigUint::from(b).pow(p as u32));
        prop_assert_eq!(lhs.compare(&rhs, 64).ordering(), Some(expected));
    }

    #[test]
    fn more_precision_never_flips_an_answer(
        a in 1u64..2000, c in 1u64..2000, ell in 0u64..4, p in -8i64..8, q in 1i64..9,
    ) {
        let x = mu(ell, a).sub(&NormValue::log_quotient_u64(2, c, ratio(1, 1)));
        let y = NormValue::frac(p, q);
        let coarse = x.compare(&y, 24);
        let fine = x.compare(&y, 256);
        if coarse != Comparison::Undecided {
            prop_assert_eq!(coarse, fine);
        }
    }

    #[test]
    fn subatom_order_is_inclusion(x in 1u64..256, y in 1u64..256) {
        let (sx, sy) = (mask_subatom(x), mask_subatom(y));
        prop_assert_eq!(sy.le(&sx), y & !x == 0);
    }

    #[test]
    fn nm_norm_monotone_under_inclusion(x in 1u64..(1 << 16), z in 0u64..(1 << 16)) {
        let fam = NmFamily::unchecked(IndexInterval::new(0, 4), 2).unwrap();
        let n = fam.poss_count_u64().unwrap();
        prop_assume!(n <= 16);
        let x = x & ((1u64 << n) - 1);
        let y = x & z;
        prop_assume!(x != 0 && y != 0);
        let nx = fam.norm(&mask_subatom(x)).unwrap();
        let ny = fam.norm(&mask_subatom(y)).unwrap();
        prop_assert!(nx.ge(&ny).unwrap());
    }

    #[test]
    fn nn_remove_avoid_loses_at_most_the_avoided_points(x in 1u64..(1 << 16), avoid in 0u64..(1 << 16)) {
        let fam = NnFamily::unchecked(IndexInterval::new(0, 4), 2).unwrap();
        let n = fam.poss_count_u64().unwrap();
        let x = x & ((1u64 << n.min(16)) - 1);
        prop_assume!(x != 0);
        let avoid = avoid & ((1u64 << fam.points()) - 1);
        if let Ok(r) = fam.remove_avoid(&mask_subatom(x), avoid) {
            prop_assert!(r.nor0_after + avoid.count_ones() as u64 >= r.nor0_before);
            prop_assert!(r.result.le(&mask_subatom(x)));
        }
    }

    #[test]
    fn cn_norm_depends_only_on_size(seed in any::<u64>(), size in 1usize..16) {
        let fam = CnFamily::unchecked(IndexInterval::new(0, 4), 3).unwrap();
        let n = fam.poss_count_u64().unwrap();
        prop_assume!((size as u64) <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng| {
            Subatom::new(rand::seq::index::sample(rng, n as usize, size).into_iter().map(|i| i as u64)).unwrap()
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        prop_assert_eq!(fam.norm(&a).unwrap().try_cmp(&fam.norm(&b).unwrap()).unwrap(), Ordering::Equal);
    }

    #[test]
    fn sacks_norm_is_antitone(
        s in 1u64..(1 << 16), t in any::<u64>(), big_b in 2u64..4, extra_b in 0u64..2, m in 1u64..3, extra_m in 0u64..2,
    ) {
        let iv = IndexInterval::new(0, 4);
        let branches = |mask: u64| (0..16u64).filter(move |i| mask >> i & 1 == 1);
        let sub = s & t;
        prop_assume!(sub != 0);
        let col = SacksColumn::new(iv, branches(s)).unwrap();
        let smaller = SacksColumn::new(iv, branches(sub)).unwrap();
        prop_assert!(smaller.le(&col));
        let big = col.nor_sacks(big_b, m).unwrap();
        let small = smaller.nor_sacks(big_b + extra_b, m + extra_m).unwrap();
        prop_assert!(small <= big);
    }

    #[test]
    fn relative_measure_is_a_martingale(leaves in prop::collection::vec(0u64..64, 1..40), len in 0u32..6, bits in any::<u64>()) {
        let tree = FiniteTree::new(6, leaves).unwrap();
        let bits = bits & ((1u64 << len) - 1);
        let node = Node { len, bits };
        let left = tree.relative_measure(Node { len: len + 1, bits });
        let right = tree.relative_measure(Node { len: len + 1, bits: bits | 1 << len });
        prop_assert_eq!(tree.relative_measure(node) * ratio(2, 1), left + right);
    }

    #[test]
    fn atom_norm_matches_subset_maximum(ell in 0u64..4, vals in prop::collection::vec((0i64..12, 1i64..4), 1..9)) {
        let norms: Vec<NormValue> = vals.iter().map(|&(p, q)| NormValue::frac(p, q)).collect();
        let fast = atom_norm(ell, &norms).unwrap().value;
        let slow = atom_norm_brute(ell, &norms).unwrap();
        prop_assert_eq!(fast.try_cmp(&slow).unwrap(), Ordering::Equal);
    }

    #[test]
    fn atom_norm_is_monotone(ell in 0u64..4, vals in prop::collection::vec((0i64..12, 1i64..4), 1..9), j in any::<prop::sample::Index>(), bump in 1i64..5) {
        let norms: Vec<NormValue> = vals.iter().map(|&(p, q)| NormValue::frac(p, q)).collect();
        let mut stronger = norms.clone();
        let j = j.index(norms.len());
        stronger[j] = NormValue::frac(vals[j].0 + bump, vals[j].1);
        let before = atom_norm(ell, &norms).unwrap().value;
        let after = atom_norm(ell, &stronger).unwrap().value;
        prop_assert!(after.ge(&before).unwrap());
    }

    #[test]
    fn split_j_is_disjoint_and_loses_at_most_one(
        ell in 1u64..4,
        raw in prop::collection::vec(prop::collection::btree_set(0u64..400, 0..200), 1..5),
    ) {
        let sets: Vec<Vec<u64>> = raw.into_iter().take(ell as usize + 1).map(|s| s.into_iter().collect()).collect();
        let out = split_j(ell, &sets).unwrap();
        prop_assert!(pairwise_disjoint(&out));
        for (a, b) in sets.iter().zip(&out) {
            prop_assert!(b.iter().all(|x| a.contains(x)));
            let floor = mu(ell, a.len() as u64).sub_rational(ratio(1, 1));
            prop_assert!(mu(ell, b.len() as u64).ge(&floor).unwrap());
        }
    }

    #[test]
    fn slalom_round_trip(pairs in prop::collection::vec((0u64..20, any::<u64>()), 0..30)) {
        let g: Vec<u64> = pairs.iter().map(|&(b, _)| b).collect();
        let f: Vec<u64> = pairs.iter().map(|&(b, r)| r % (b + 1)).collect();
        let r = slalom_encode(&f, &g).unwrap();
        prop_assert_eq!(slalom_decode(&r, &g).unwrap(), f);
    }

    #[test]
    fn lognor_is_below_both_norms_and_monotone(x in 0u64..3000) {
        let spec = LognorSpec::cap_div(4, 3).unwrap();
        let big = BigUint::from(x);
        let l = spec.lognor(&big).unwrap();
        prop_assert!(l <= spec.nor(0, &big).min(spec.nor(1, &big)));
        prop_assert!(spec.lognor_u64(x + 1).unwrap() >= l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn condition_order_is_transitive(seed in any::<u64>()) {
        let frame = algebra_frame();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_condition(&frame, &mut rng).unwrap();
        prop_assert!(leq_check(&frame, &p, &p).unwrap().holds());
        let Ok(q) = random_strengthening(&frame, &p, &mut rng) else { return Ok(()) };
        let Ok(r) = random_strengthening(&frame, &q, &mut rng) else { return Ok(()) };
        prop_assert!(leq_check(&frame, &q, &p).unwrap().holds());
        prop_assert!(leq_check(&frame, &r, &q).unwrap().holds());
        prop_assert!(leq_check(&frame, &r, &p).unwrap().holds());
    }
}
