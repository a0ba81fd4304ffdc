//! Reference evaluator used to cross-check [`crate::checker`].
//!
//! It evaluates one world at a time by direct recursion on the satisfaction
//! clauses and unrolls every temporal quantifier to `3·|W|` iterates, without
//! computing orbits.

use crate::formula::Formula;
use crate::model::{Model, WorldId};

pub fn naive_satisfies(m: &Model, w: WorldId, f: &Formula) -> bool {
    eval(m, w, f, 3 * m.len())
}

fn iterate(m: &Model, w: WorldId, horizon: usize) -> impl Iterator<Item = WorldId> + '_ {
    std::iter::successors(Some(w), move |&x| Some(m.succ(x))).take(horizon)
}

fn eval(m: &Model, w: WorldId, f: &Formula, horizon: usize) -> bool {
    match f {
        Formula::Atom(p) => m.valuation().get(p).is_some_and(|s| s.contains(w.index())),
        Formula::Bottom => false,
        Formula::And(a, b) => eval(m, w, a, horizon) && eval(m, w, b, horizon),
        Formula::Or(a, b) => eval(m, w, a, horizon) || eval(m, w, b, horizon),
        Formula::Implies(a, b) => m
            .worlds()
            .filter(|&v| m.leq(w, v))
            .all(|v| !eval(m, v, a, horizon) || eval(m, v, b, horizon)),
        Formula::Next(a) => eval(m, m.succ(w), a, horizon),
        Formula::Eventually(a) => iterate(m, w, horizon).any(|x| eval(m, x, a, horizon)),
        Formula::Henceforth(a) => iterate(m, w, horizon).all(|x| eval(m, x, a, horizon)),
        Formula::Until(a, b) => {
            let seq: Vec<WorldId> = iterate(m, w, horizon).collect();
            (0..seq.len()).any(|k| eval(m, seq[k], b, horizon) && seq[..k].iter().all(|&x| eval(m, x, a, horizon)))
        }
        Formula::Release(a, b) => {
            let seq: Vec<WorldId> = iterate(m, w, horizon).collect();
            (0..seq.len()).all(|k| eval(m, seq[k], b, horizon) || seq[..k].iter().any(|&x| eval(m, x, a, horizon)))
        }
    }
}
