use creature_core::frame::gen::{algebra_frame, random_condition, random_strengthening, unhalving_frame, unhalving_instance};
use creature_core::frame::{
    half_condition, iota, iota_inverse, leq_check, poss_set, possibility_elements, validate_condition, PossVariant, Sublevel,
};
use creature_core::compound::unhalve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_conditions_validate_and_are_reflexive() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let p = random_condition(&frame, &mut rng).unwrap();
        let v = validate_condition(&frame, &p).unwrap();
        assert!(v.is_valid(), "{p}\n{v:?}");
        assert!(leq_check(&frame, &p, &p).unwrap().holds());
    }
}

#[test]
fn strengthenings_are_below() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts = [0usize; 2];
    for _ in 0..60 {
        let p = random_condition(&frame, &mut rng).unwrap();
        match random_strengthening(&frame, &p, &mut rng) {
            Ok(q) => {
                let r = leq_check(&frame, &q, &p).unwrap();
                assert!(r.holds(), "{p}\n{q}\n{r:?}");
                counts[0] += 1;
            }
            Err(e) => {
                eprintln!("skip: {e}");
                counts[1] += 1;
            }
        }
    }
    eprintln!("{counts:?}");
    assert!(counts[0] > 40);
}

#[test]
fn iota_is_a_bijection_on_small_sets() {
    let frame = algebra_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..30 {
        let p = random_condition(&frame, &mut rng).unwrap();
        let h = p.height().unwrap();
        let u = Sublevel::sacks(h);
        let a = poss_set(&frame, &p, u, PossVariant::PerIndex).unwrap();
        let b = poss_set(&frame, &p, u, PossVariant::PerSublevel).unwrap();
        assert_eq!(a.cardinality(), b.cardinality());
        if let Ok(elems) = possibility_elements(&a, 1 << 14) {
            for e in elems {
                let img = iota(&a, &b, &e).unwrap();
                assert!(b.contains(&img));
                assert_eq!(iota_inverse(&a, &b, &img).unwrap(), e);
            }
            checked += 1;
        }
    }
    assert!(checked > 5, "{checked}");
}

#[test]
fn unhalving_instances() {
    let frame = unhalving_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let (q, h, r, m) = unhalving_instance(&frame, &mut rng).unwrap();
        let hq = half_condition(&frame, &q, h).unwrap();
        assert!(leq_check(&frame, &r, &hq).unwrap().holds());
        let (_, rep) = unhalve(&frame, &q, h, &r, &m).unwrap();
        assert!(rep.holds(), "{rep:?}");
    }
}

