//! Model counts from the canonical enumerator against a brute-force labelled
//! generator that deduplicates by minimizing over every world permutation.

use std::collections::{BTreeMap, HashSet};

use itl_core::model::{FrameClass, Model, WorldSet};
use itl_core::search::{enumerate_models, SearchBounds};

/// Canonical code of a labelled structure: the least encoding over all
/// relabellings of (order, successor, valuation).
fn code(n: usize, leq: &[Vec<bool>], succ: &[usize], val: &[Vec<bool>], perms: &[Vec<usize>]) -> Vec<u8> {
    perms
        .iter()
        .map(|p| {
            let mut inv = vec![0; n];
            for (i, &x) in p.iter().enumerate() {
                inv[x] = i;
            }
            let mut out = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    out.push(leq[inv[a]][inv[b]] as u8);
                }
            }
            for a in 0..n {
                out.push(p[succ[inv[a]]] as u8);
            }
            for atom in val {
                for a in 0..n {
                    out.push(atom[inv[a]] as u8);
                }
            }
            out
        })
        .min()
        .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every reflexive, antisymmetric, transitive relation on `n` points.
fn partial_orders(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| a != b).collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                r[a][b] = true;
            }
        }
        let antisym = (0..n).all(|a| (0..n).all(|b| a == b || !(r[a][b] && r[b][a])));
        let trans = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(r[a][b] && r[b][c]) || r[a][c])));
        if antisym && trans {
            out.push(r);
        }
    }
    out
}

fn brute_force_count(max_worlds: usize, atoms: usize, class: FrameClass) -> usize {
    let mut total = 0;
    for n in 1..=max_worlds {
        let perms = permutations(n);
        let mut seen = HashSet::new();
        for leq in partial_orders(n) {
            let upsets: Vec<Vec<bool>> = (0u32..1 << n)
                .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
                .filter(|s| (0..n).all(|a| (0..n).all(|b| !(s[a] && leq[a][b]) || s[b])))
                .collect();
            for code_s in 0..n.pow(n as u32) {
                let succ: Vec<usize> = (0..n).map(|i| code_s / n.pow(i as u32) % n).collect();
                let fc = (0..n).all(|a| (0..n).all(|b| !leq[a][b] || leq[succ[a]][succ[b]]));
                if !fc {
                    continue;
                }
                let bc = (0..n).all(|w| {
                    (0..n).filter(|&v| leq[succ[w]][v]).all(|v| (0..n).any(|u| leq[w][u] && succ[u] == v))
                });
                if class != FrameClass::Expanding && !bc {
                    continue;
                }
                let mut choice = vec![0usize; atoms];
                loop {
                    let val: Vec<Vec<bool>> = choice.iter().map(|&c| upsets[c].clone()).collect();
                    let keep = class != FrameClass::HereAndThere || as_model(n, &leq, &succ, &val).is_here_and_there();
                    if keep {
                        seen.insert(code(n, &leq, &succ, &val, &perms));
                    }
                    let mut k = 0;
                    while k < atoms {
                        choice[k] += 1;
                        if choice[k] < upsets.len() {
                            break;
                        }
                        choice[k] = 0;
                        k += 1;
                    }
                    if k == atoms {
                        break;
                    }
                }
            }
        }
        total += seen.len();
    }
    total
}

fn as_model(n: usize, leq: &[Vec<bool>], succ: &[usize], val: &[Vec<bool>]) -> Model {
    let order: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && leq[a][b])
        .collect();
    let valuation: BTreeMap<String, WorldSet> = val
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut set = WorldSet::with_capacity(n);
            set.extend((0..n).filter(|&i| s[i]));
            (format!("a{k}"), set)
        })
        .collect();
    Model::from_parts((0..n).map(|i| format!("x{i}")).collect(), &order, succ.to_vec(), valuation).unwrap()
}

fn enumerated(class: FrameClass, max_worlds: usize, atoms: usize) -> Vec<Model> {
    let names: Vec<String> = (0..atoms).map(|k| format!("a{k}")).collect();
    enumerate_models(&SearchBounds::new(class, max_worlds, names)).collect()
}

fn model_code(m: &Model) -> Vec<u8> {
    let n = m.len();
    let leq: Vec<Vec<bool>> = m.worlds().map(|a| m.worlds().map(|b| m.leq(a, b)).collect()).collect();
    let succ: Vec<usize> = m.successor_table().to_vec();
    let val: Vec<Vec<bool>> = m
        .valuation()
        .values()
        .map(|s| (0..n).map(|i| s.contains(i)).collect())
        .collect();
    code(n, &leq, &succ, &val, &permutations(n))
}

#[test]
fn hand_counted_values() {
    assert_eq!(brute_force_count(1, 1, FrameClass::Expanding), 2);
    assert_eq!(brute_force_count(2, 0, FrameClass::Expanding), 7);
    assert_eq!(enumerated(FrameClass::Expanding, 1, 1).len(), 2);
    assert_eq!(enumerated(FrameClass::Expanding, 2, 0).len(), 7);
}

#[test]
fn general_enumerator_matches_brute_force() {
    for class in [FrameClass::Expanding, FrameClass::Persistent] {
        for (max_worlds, atoms) in [(3, 0), (3, 1), (3, 2), (4, 0), (4, 1)] {
            assert_eq!(
                enumerated(class, max_worlds, atoms).len(),
                brute_force_count(max_worlds, atoms, class),
                "{class}, {max_worlds} worlds, {atoms} atoms"
            );
        }
    }
}

#[test]
fn here_and_there_generator_matches_brute_force_and_filter() {
    for (max_worlds, atoms) in [(2, 1), (4, 0), (4, 1), (4, 2)] {
        let ht = enumerated(FrameClass::HereAndThere, max_worlds, atoms);
        assert_eq!(ht.len(), brute_force_count(max_worlds, atoms, FrameClass::HereAndThere));
        let filtered = enumerated(FrameClass::Persistent, max_worlds, atoms)
            .into_iter()
            .filter(Model::is_here_and_there)
            .count();
        assert_eq!(ht.len(), filtered);
    }
}

#[test]
fn enumerated_models_are_pairwise_non_isomorphic_and_in_class() {
    for class in [FrameClass::Expanding, FrameClass::Persistent, FrameClass::HereAndThere] {
        let models = enumerated(class, 4, 1);
        let mut seen = HashSet::new();
        for m in &models {
            assert!(m.validate().is_ok());
            assert!(m.belongs_to(class), "{m}");
            assert!(seen.insert(model_code(m)), "duplicate model\n{m}");
        }
    }
}

#[test]
fn seeded_order_is_deterministic_and_complete() {
    let base = SearchBounds::new(FrameClass::Expanding, 3, ["p"]);
    let a: Vec<Model> = enumerate_models(&base.clone().with_seed(11)).collect();
    let b: Vec<Model> = enumerate_models(&base.clone().with_seed(11)).collect();
    assert_eq!(a, b);
    let mut c: Vec<Vec<u8>> = enumerate_models(&base).map(|m| model_code(&m)).collect();
    let mut d: Vec<Vec<u8>> = a.iter().map(model_code).collect();
    c.sort();
    d.sort();
    assert_eq!(c, d);
}
