use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use itl_core::bisim::{
    max_family, max_family_with_bound, parse_family, preservation_check, serialize_family, verify_family,
    verify_family_with_bound, BisimFamily, BisimKind, IterateBound,
};
use itl_core::checker::extension;
use itl_core::countermodels::{expanding_family_e, fisher_servi_model, ht_family_h, weak_connectedness_model};
use itl_core::formula::{enumerate_formulas, parse_formula, random_formula};
use itl_core::model::{Model, WorldId};
use itl_core::search::random_model;

fn small_models() -> Vec<Model> {
    let mut models = vec![
        fisher_servi_model(),
        weak_connectedness_model(),
        ht_family_h(1),
        expanding_family_e(1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    models.extend((0..6).map(|_| random_model(&mut rng, 4, &["p"])));
    models
}

#[test]
fn max_families_verify_and_descend() {
    let models = small_models();
    for kind in BisimKind::ALL {
        for a in &models {
            for b in &models {
                let fam = max_family(kind, a, b, 3);
                assert_eq!(verify_family(kind, &fam).unwrap(), vec![], "{kind}");
                for i in 1..fam.chain.len() {
                    assert!(fam.chain[i].is_subset(&fam.chain[i - 1]));
                }
            }
        }
    }
}

#[test]
fn adding_any_excluded_pair_creates_a_violation() {
    let models = small_models();
    for kind in BisimKind::ALL {
        for a in models.iter().take(5) {
            for b in models.iter().take(5) {
                let fam = max_family(kind, a, b, 2);
                for level in 0..fam.chain.len() {
                    for x in a.worlds() {
                        for y in b.worlds() {
                            if fam.contains(level, (x, y)) {
                                continue;
                            }
                            let mut bigger = fam.clone();
                            bigger.chain[level].insert((x, y));
                            let broken = match verify_family(kind, &bigger) {
                                Err(_) => true,
                                Ok(v) => !v.is_empty(),
                            };
                            assert!(broken, "{kind}: adding ({x:?},{y:?}) at level {level} stays valid");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn temporal_kinds_refine_their_weaker_kinds() {
    let mut models = small_models();
    for n in 1..=3 {
        models.push(ht_family_h(n));
        models.push(expanding_family_e(n));
    }
    for m in &models {
        let depth = 3;
        let next = max_family(BisimKind::Next, m, m, depth);
        let diamond = max_family(BisimKind::Diamond, m, m, depth);
        let boxed = max_family(BisimKind::Box, m, m, depth);
        let until = max_family(BisimKind::Until, m, m, depth);
        let release = max_family(BisimKind::Release, m, m, depth);
        for i in 0..=depth {
            assert!(until.chain[i].is_subset(&diamond.chain[i]));
            assert!(release.chain[i].is_subset(&boxed.chain[i]));
            for fam in [&diamond, &boxed, &until, &release] {
                assert!(fam.chain[i].is_subset(&next.chain[i]));
            }
        }
    }
}

#[test]
fn saturation_bound_agrees_with_a_generous_bound() {
    let models = small_models();
    for kind in BisimKind::ALL {
        for a in &models {
            for b in &models {
                let generous = IterateBound::Fixed(4 * (a.len() + b.len()));
                let sat = max_family(kind, a, b, 3);
                let wide = max_family_with_bound(kind, a, b, 3, generous);
                assert_eq!(sat.chain, wide.chain, "{kind}");
                assert_eq!(verify_family_with_bound(kind, &sat, generous).unwrap(), vec![]);
            }
        }
    }
}

#[test]
fn related_pairs_agree_on_short_fragment_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..40 {
        let a = random_model(&mut rng, 4, &["p", "q"]);
        let b = random_model(&mut rng, 4, &["p", "q"]);
        for kind in BisimKind::ALL {
            let fam = max_family(kind, &a, &b, 3);
            let mut formulas = enumerate_formulas(1, &["p", "q"], kind.fragment());
            formulas.extend((0..60).map(|_| random_formula(&mut rng, 3, &["p", "q"], kind.fragment())));
            assert_eq!(preservation_check(kind, &fam, &formulas).unwrap(), vec![], "{kind}");
        }
    }
}

#[test]
fn violations_replay_at_their_reported_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut seen = 0;
    for _ in 0..60 {
        let a = random_model(&mut rng, 4, &["p"]);
        let b = random_model(&mut rng, 4, &["p"]);
        for kind in BisimKind::ALL {
            let mut fam = max_family(kind, &a, &b, 2);
            // Relate a random pair at every level to provoke violations.
            let pair = (WorldId(rng.gen_range(0..a.len())), WorldId(rng.gen_range(0..b.len())));
            for z in &mut fam.chain {
                z.insert(pair);
            }
            for v in verify_family(kind, &fam).unwrap() {
                seen += 1;
                assert!(v.replays(&fam), "{}", v.describe(&a, &b));
                assert!(kind.clauses().contains(&v.clause));
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn separated_worlds_are_not_deeply_related() {
    // G p tells (0_0) and (0_1) of H_2 apart, so the box family cuts them by depth 2.
    let h = ht_family_h(2);
    let fam = max_family(BisimKind::Box, &h, &h, 2);
    let pair = fam.pair_by_name("0_0", "0_1").unwrap();
    assert!(!fam.contains(2, pair));
    let g = parse_formula("G p").unwrap();
    let ext = extension(&h, &g);
    assert_ne!(ext.contains(pair.0.index()), ext.contains(pair.1.index()));
}

#[test]
fn family_text_round_trips() {
    for m in small_models().iter().take(4) {
        for kind in BisimKind::ALL {
            let fam = max_family(kind, m, m, 2);
            let back = parse_family(&serialize_family(&fam), m, m).unwrap();
            assert_eq!(back, fam);
        }
    }
}

#[test]
fn isomorphic_lassos_stay_related() {
    // a -> b -> b and c -> d -> d, with p at b and d.
    let m = itl_core::model::ModelBuilder::new()
        .worlds(["a", "b", "c", "d"])
        .succ("a", "b")
        .succ("b", "b")
        .succ("c", "d")
        .succ("d", "d")
        .val("p", ["b", "d"])
        .build()
        .unwrap();
    let fam: BisimFamily = max_family(BisimKind::Until, &m, &m, 3);
    let pair = fam.pair_by_name("a", "c").unwrap();
    assert_eq!(fam.deepest_level(pair), Some(3));
    let pair = fam.pair_by_name("a", "d").unwrap();
    assert_eq!(fam.deepest_level(pair), None);
}
