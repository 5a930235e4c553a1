use std::collections::BTreeSet;

use creature_core::compound::{
    glue_purely_stronger, build_full, compound_norm, glue, half, is_purely_stronger, restrict, union_creature, CompoundCreature,
};
use creature_core::exactnum::{NormValue, Rational};
use creature_core::frame::gen::{algebra_frame, full_creature, random_condition, random_creature, unhalving_frame};
use creature_core::frame::toy::{uniform_frame, ToyConfig};
use creature_core::frame::{Frame, Index, IndexType};
use creature_core::subatoms::Subatom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ix(id: u32, ty: IndexType) -> Index {
    Index::new(id, ty)
}

fn supp(items: &[(u32, IndexType)]) -> BTreeSet<Index> {
    items.iter().map(|&(i, t)| ix(i, t)).collect()
}

fn nor(frame: &Frame, c: &CompoundCreature) -> NormValue {
    compound_norm(frame, c).unwrap().total
}

/// Interval enclosures at 60 bits, used as an independent check of the exact comparisons.
fn approx_ge(a: &NormValue, b: &NormValue) -> bool {
    a.interval(60).hi >= b.interval(60).lo
}

fn half_frame() -> Frame {
    uniform_frame(&ToyConfig {
        height: 9,
        sacks_len: 4,
        j_count: 54,
        big_b: 2,
        sub_big_b: 2,
        sacks_arity: 1,
        mu_param: 0,
        maxposs: Some(1),
        nm_len: 6,
        nm_b: 2,
        ls_poss: 8,
        ls_base: 2,
        ls_divisor: 1,
    })
    .unwrap()
}

#[test]
fn glued_norm_is_at_least_the_least_part() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..40 {
        let p = random_condition(&frame, &mut rng).unwrap();
        let g = glue(&frame, p.creatures()).unwrap();
        let least = p.creatures().iter().map(|c| nor(&frame, c)).reduce(|a, b| if approx_ge(&a, &b) { b } else { a }).unwrap();
        assert!(nor(&frame, &g).ge(&least).unwrap());
        assert!(approx_ge(&nor(&frame, &g), &least));
        assert_eq!(g.m_dn(), p.w()[0]);
        assert_eq!(g.m_up(), p.height().unwrap());
    }
}

#[test]
fn halving_drops_by_at_most_one_over_maxposs() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let p = random_condition(&frame, &mut rng).unwrap();
        for c in p.creatures() {
            let hc = half(&frame, c).unwrap();
            let mp = &frame.level(c.m_dn()).unwrap().maxposs_below;
            let slack = Rational::new(1.into(), mp.clone().into());
            assert!(approx_ge(&nor(&frame, &hc), &nor(&frame, c).sub_rational(slack)));
            assert!(hc.halving_all().iter().zip(c.halving_all()).all(|(a, b)| a >= b));
        }
    }
}

#[test]
fn halving_drop_is_exact_when_liminf_is_the_unique_minimum() {
    let frame = half_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let c = full_creature(&frame, &mut rng, 6, 7, &supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)])).unwrap();
    let n = compound_norm(&frame, &c).unwrap();
    let liminf = n.liminf.values().next().unwrap().clone();
    let others: Vec<NormValue> = std::iter::once(n.width.clone())
        .chain(n.sacks.values().map(|&v| NormValue::from_int(v as i64)))
        .chain(n.limsup.values().cloned())
        .collect();
    assert!(others.iter().all(|o| o.gt(&liminf).unwrap()), "{n:?}");
    // N - d = 3 here
    let hc = half(&frame, &c).unwrap();
    let after = nor(&frame, &hc);
    let expected = n.total.sub_rational(Rational::from_integer(1.into()));
    let diff = after.sub(&expected).interval(60);
    let tol = Rational::new(1.into(), (1u64 << 40).into());
    assert!(diff.lo >= -tol.clone() && diff.hi <= tol, "{after} vs {expected}");
}

#[test]
fn union_norm_and_restrictions() {
    // four non-Sacks indices need mu_param >= 3 to be disjointified
    let frame = uniform_frame(&ToyConfig { height: 7, j_count: 54, mu_param: 3, nm_len: 6, maxposs: Some(1), ..ToyConfig::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)]);
    let b = supp(&[(1, IndexType::Sk), (1, IndexType::Nm), (0, IndexType::Cn)]);
    for _ in 0..5 {
        let c1 = full_creature(&frame, &mut rng, 4, 6, &a).unwrap();
        let c2 = full_creature(&frame, &mut rng, 4, 6, &b).unwrap();
        let u = union_creature(&frame, &c1, &c2).unwrap();
        let x = nor(&frame, &c1);
        let x2 = nor(&frame, &c2);
        let x = if approx_ge(&x, &x2) { x2 } else { x };
        let bound = x.scale(Rational::new(1.into(), 2.into())).sub_rational(Rational::from_integer(1.into()));
        assert!(approx_ge(&nor(&frame, &u), &bound));
        assert_eq!(u.supp(), &a.union(&b).copied().collect());
        let back = restrict(&frame, &u, &a).unwrap();
        assert!(is_purely_stronger(&back, &c1));
        assert!(approx_ge(&nor(&frame, &back), &nor(&frame, &u)));
    }
}

#[test]
fn union_rejects_disagreement() {
    let frame = unhalving_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)]);
    let c1 = full_creature(&frame, &mut rng, 4, 5, &a).unwrap();
    let c2 = full_creature(&frame, &mut rng, 4, 5, &a).unwrap();
    assert!(c1 == c2 || union_creature(&frame, &c1, &c2).is_err());
}

#[test]
fn restriction_does_not_lower_the_norm() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let full = supp(&[(0, IndexType::Sk), (1, IndexType::Sk), (0, IndexType::Nm), (1, IndexType::Nm), (0, IndexType::Nn), (0, IndexType::Cn)]);
    let core = supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)]);
    for _ in 0..30 {
        let c = random_creature(&frame, &mut rng, 3, 5, &full).unwrap();
        let r = restrict(&frame, &c, &core).unwrap();
        assert!(approx_ge(&nor(&frame, &r), &nor(&frame, &c)));
    }
    let c = random_creature(&frame, &mut rng, 3, 5, &full).unwrap();
    assert!(restrict(&frame, &c, &supp(&[(0, IndexType::Nm), (0, IndexType::Nn)])).is_err());
}

#[test]
fn build_full_reaches_the_width_norm() {
    let frame = uniform_frame(&ToyConfig {
        height: 7,
        j_count: 2187,
        nm_len: 6,
        maxposs: Some(1),
        ..ToyConfig::default()
    })
    .unwrap();
    let s = supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)]);
    let c = build_full(&frame, 4, 6, &s).unwrap();
    let n = compound_norm(&frame, &c).unwrap();
    assert_eq!(n.width.exact(), Some(Rational::new(4.into(), 3.into())));
    assert!(n.total.ge(&n.width).unwrap());
    assert!(build_full(&frame, 3, 5, &s).is_err(), "|supp| must stay below maxwidth(m_dn)");
    assert!(build_full(&frame, 2, 5, &s).is_err());
}

#[test]
fn glue_purely_stronger_keeps_the_least_norm() {
    let frame = unhalving_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let s = supp(&[(0, IndexType::Sk), (0, IndexType::Nm), (0, IndexType::Nn)]);
    let cs: Vec<CompoundCreature> =
        [(3, 4), (4, 6), (6, 7)].iter().map(|&(a, b)| full_creature(&frame, &mut rng, a, b, &s).unwrap()).collect();
    // shrink the lim-sup subatoms of the first two to half their size
    let ds: Vec<CompoundCreature> = cs[..2]
        .iter()
        .map(|c| {
            let mut grid = c.grid().clone();
            for (i, rows) in grid.iter_mut() {
                if i.ty.is_limsup() {
                    for x in rows.iter_mut().flatten().filter(|x| x.len() > 1) {
                        *x = Subatom::new(x.poss()[..x.len() / 2].iter().copied()).unwrap();
                    }
                }
            }
            CompoundCreature::new(&frame, c.m_dn(), c.m_up(), c.columns().clone(), grid, c.halving_all().to_vec()).unwrap()
        })
        .collect();
    let g = glue_purely_stronger(&frame, &cs, &ds).unwrap();
    assert_eq!((g.m_dn(), g.m_up()), (3, 7));
    let least = cs.iter().map(|c| nor(&frame, c)).reduce(|a, b| if approx_ge(&a, &b) { b } else { a }).unwrap();
    assert!(approx_ge(&nor(&frame, &g), &least));
}
