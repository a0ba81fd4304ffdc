use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use itl_core::checker::{check_monotone_extension, extension, orbit, satisfies, Checker};
use itl_core::formula::{parse_formula, random_formula, Formula, Fragment};
use itl_core::model::{parse_model, serialize_model, FrameClass, Model};
use itl_core::oracle::naive_satisfies;
use itl_core::search::{check_equivalence, find_countermodel, random_model, SearchBounds};

const ATOMS: [&str; 2] = ["p", "q"];

fn sample(seed: u64, formula_len: usize) -> (Model, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_model(&mut rng, 5, &ATOMS);
    let f = random_formula(&mut rng, formula_len, &ATOMS, Fragment::Full);
    (m, f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extensions_are_upward_closed(seed in any::<u64>()) {
        let (m, f) = sample(seed, 7);
        prop_assert!(check_monotone_extension(&m, &f).is_ok(), "{} on\n{}", f, m);
    }

    #[test]
    fn checker_agrees_with_naive_unrolling(seed in any::<u64>()) {
        let (m, f) = sample(seed, 6);
        for w in m.worlds() {
            prop_assert_eq!(satisfies(&m, w, &f).unwrap(), naive_satisfies(&m, w, &f));
        }
    }

    #[test]
    fn orbits_are_lassos(seed in any::<u64>()) {
        let (m, _) = sample(seed, 0);
        for w in m.worlds() {
            let o = orbit(&m, w);
            prop_assert!(!o.cycle.is_empty());
            prop_assert!(o.len() <= m.len());
            let all: std::collections::HashSet<_> = o.iter().collect();
            prop_assert_eq!(all.len(), o.len());
            let last = *o.cycle.last().unwrap();
            prop_assert_eq!(m.succ(last), o.cycle[0]);
            let mut x = w;
            for k in 0..3 * m.len() {
                prop_assert_eq!(o.at(k), x);
                x = m.succ(x);
            }
        }
    }

    #[test]
    fn fixpoint_unfoldings_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 5, &ATOMS);
        let a = random_formula(&mut rng, 2, &ATOMS, Fragment::Full);
        let b = random_formula(&mut rng, 2, &ATOMS, Fragment::Full);
        let c = Checker::new(&m);
        let until = a.clone().until(b.clone());
        let release = a.clone().release(b.clone());
        let until_unfolded = b.clone().or(a.clone().and(until.clone().next()));
        let release_unfolded = b.clone().and(a.clone().or(release.clone().next()));
        prop_assert_eq!(c.extension(&until), c.extension(&until_unfolded));
        prop_assert_eq!(c.extension(&release), c.extension(&release_unfolded));
        prop_assert_eq!(c.extension(&a.clone().eventually()), c.extension(&Formula::top().until(a.clone())));
        prop_assert_eq!(c.extension(&a.clone().henceforth()), c.extension(&Formula::Bottom.release(a)));
    }

    #[test]
    fn models_round_trip_through_text(seed in any::<u64>()) {
        let (m, _) = sample(seed, 0);
        let text = serialize_model(&m);
        prop_assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn random_models_are_expanding(seed in any::<u64>()) {
        let (m, _) = sample(seed, 0);
        prop_assert!(m.belongs_to(FrameClass::Expanding));
        prop_assert_eq!(m.is_backward_confluent(), m.belongs_to(FrameClass::Persistent));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exhaustion_descends_the_class_chain(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4, &ATOMS, Fragment::Full);
        let at = |class| find_countermodel(&f, &SearchBounds::new(class, 4, ATOMS));
        if at(FrameClass::Expanding).is_exhausted() {
            prop_assert!(at(FrameClass::Persistent).is_exhausted());
            prop_assert!(at(FrameClass::HereAndThere).is_exhausted());
        }
        if at(FrameClass::Persistent).is_exhausted() {
            prop_assert!(at(FrameClass::HereAndThere).is_exhausted());
        }
    }

    #[test]
    fn witnesses_reproduce_their_verdict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4, &ATOMS, Fragment::Full);
        let g = random_formula(&mut rng, 4, &ATOMS, Fragment::Full);
        let bounds = SearchBounds::new(FrameClass::Expanding, 3, ATOMS);
        let r = find_countermodel(&f, &bounds);
        if let Some(w) = &r.witness {
            prop_assert!(!naive_satisfies(&w.model, w.world, &f));
            let reparsed = parse_model(&serialize_model(&w.model)).unwrap();
            prop_assert!(!satisfies(&reparsed, w.world, &f).unwrap());
        }
        let r = check_equivalence(&f, &g, &bounds);
        if let Some(w) = &r.witness {
            prop_assert_ne!(naive_satisfies(&w.model, w.world, &f), naive_satisfies(&w.model, w.world, &g));
        }
    }

    #[test]
    fn seeded_searches_are_reproducible(seed in any::<u64>(), order_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4, &ATOMS, Fragment::Full);
        let bounds = SearchBounds::new(FrameClass::Expanding, 3, ATOMS).with_seed(order_seed);
        prop_assert_eq!(find_countermodel(&f, &bounds), find_countermodel(&f, &bounds));
    }
}

#[test]
fn search_examples_hold() {
    let f = |s: &str| parse_formula(s).unwrap();
    let b = |class, n| SearchBounds::new(class, n, ATOMS);
    let fs1 = f("(X p -> X q) -> X(p -> q)");
    let r = find_countermodel(&fs1, &b(FrameClass::Expanding, 3));
    assert!(r.is_found());
    assert!(r.witness.unwrap().model.len() <= 3);
    assert!(find_countermodel(&fs1, &b(FrameClass::Persistent, 4)).is_exhausted());
    assert!(find_countermodel(&f("p -> p"), &b(FrameClass::Expanding, 3)).is_exhausted());
    assert!(check_equivalence(&f("G p"), &f("false R p"), &b(FrameClass::Expanding, 3)).is_exhausted());
    let r = check_equivalence(
        &f("F p"),
        &itl_core::countermodels::diamond_from_box("p"),
        &b(FrameClass::Expanding, 4),
    );
    assert!(r.is_found());
    let w = r.witness.unwrap();
    let d = itl_core::countermodels::diamond_from_box("p");
    assert!(!extension(&w.model, &f("F p")).contains(w.world.index()));
    assert!(extension(&w.model, &d).contains(w.world.index()));
}
